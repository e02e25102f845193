#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "pdprl/nn.hpp"
#include "pdprl/rng.hpp"

using namespace pdprl;

namespace {

using DTape = Tape<double>;
using Var = DTape::Var;

Tensor2<double> random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  Tensor2<double> t(r, c);
  for (auto& x : t.data) x = rng.uniform(-scale, scale);
  return t;
}

// Central finite differences against the tape gradient for a scalar loss
// built from store parameters. The independent oracle for backward().
double fd_max_rel_err(ParamStore<double>& store,
                      const std::function<Var(DTape&, ParamVars<double>&)>& build,
                      double h = 1e-5) {
  GradBuffer<double> grads;
  grads.reset(store);
  {
    DTape t(true);
    ParamVars<double> pv(t, store);
    t.backward(build(t, pv), grads);
  }
  auto eval = [&]() {
    DTape t(false);
    ParamVars<double> pv(t, store);
    return t.value(build(t, pv)).data[0];
  };
  double worst = 0.0;
  for (int s = 0; s < store.count(); ++s) {
    auto& theta = store.value(s);
    for (size_t i = 0; i < theta.data.size(); ++i) {
      double keep = theta.data[i];
      theta.data[i] = keep + h;
      double up = eval();
      theta.data[i] = keep - h;
      double down = eval();
      theta.data[i] = keep;
      double fd = (up - down) / (2 * h);
      double bp = grads.g[static_cast<size_t>(s)].data[i];
      worst = std::max(worst,
                       std::abs(fd - bp) / std::max({std::abs(fd), std::abs(bp), 1e-6}));
    }
  }
  return worst;
}

Tensor2<double> identity(int n) {
  Tensor2<double> t(n, n);
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

}  // namespace

TEST_CASE("linear: identity, zero weights, shapes") {
  DTape t(false);
  Tensor2<double> x(1, 2);
  x.data = {1, 2};
  auto y = linear(t, t.constant(x), t.constant(identity(2)));
  CHECK(t.value(y).data == std::vector<double>{1, 2});

  auto z = linear(t, t.constant(x), t.constant(Tensor2<double>(2, 4)));
  for (double v : t.value(z).data) CHECK(v == 0.0);

  Rng rng(1);
  auto a = t.constant(random_tensor(3, 4, rng));
  auto W = t.constant(random_tensor(4, 5, rng));
  auto out = linear(t, a, W);
  CHECK(t.value(out).rows == 3);
  CHECK(t.value(out).cols == 5);
  CHECK_THROWS_AS(t.matmul(a, a), ShapeError);
}

TEST_CASE("softmax_masked examples") {
  auto p = softmax_masked<double>({0, 0}, {0, 0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

  auto q = softmax_masked<double>({0, 0, 0}, {0, 0, kMaskSentinel<double>});
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(q[2] == 0.0);

  auto r = softmax_masked<double>({std::log(2.0), 0.0}, {0, 0});
  CHECK(r[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(r[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  CHECK_THROWS_AS(
      softmax_masked<double>({0, 0}, {kMaskSentinel<double>, kMaskSentinel<double>}),
      MaskExhausted);
}

TEST_CASE("softmax is invariant to constant shifts of unmasked logits") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits(5), mask(5, 0.0);
    for (auto& v : logits) v = rng.uniform(-3, 3);
    mask[static_cast<size_t>(rng.below(5))] = kMaskSentinel<double>;
    auto base = softmax_masked(logits, mask);
    double c = rng.uniform(-10, 10);
    for (auto& v : logits) v += c;
    auto shifted = softmax_masked(logits, mask);
    for (size_t i = 0; i < base.size(); ++i)
      CHECK(std::abs(base[i] - shifted[i]) <= 1e-9);
  }
}

TEST_CASE("mha: uniform weights for identical keys, exact masking, sharp logits") {
  DTape t(false);
  Rng rng(5);

  // identical keys -> uniform attention; V = I makes the output the weights
  Tensor2<double> K(2, 2);
  K.data = {0.3, -0.7, 0.3, -0.7};
  auto out = mha(t, t.constant(random_tensor(1, 2, rng)), t.constant(K),
                 t.constant(identity(2)), 1, t.constant(identity(2)));
  CHECK(t.value(out).at(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(t.value(out).at(0, 1) == doctest::Approx(0.5).epsilon(1e-6));

  // masked column carries exactly zero weight
  Tensor2<double> mask(1, 2);
  mask.at(0, 1) = kMaskSentinel<double>;
  auto masked = mha(t, t.constant(random_tensor(1, 2, rng)),
                    t.constant(random_tensor(2, 2, rng)), t.constant(identity(2)), 1,
                    t.constant(identity(2)), t.own_mask(mask));
  CHECK(t.value(masked).at(0, 1) == 0.0);
  CHECK(t.value(masked).at(0, 0) == 1.0);

  // single head, d_k = 1: overwhelming logit takes nearly all the mass
  Tensor2<double> q(1, 1), k(2, 1), v(2, 1);
  q.data = {10};
  k.data = {10, 0};
  v.data = {1, 0};
  auto sharp = mha(t, t.constant(q), t.constant(k), t.constant(v), 1,
                   t.constant(identity(1)));
  CHECK(t.value(sharp).at(0, 0) > 0.99);
  CHECK(t.value(sharp).at(0, 0) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-100.0))).epsilon(1e-12));

  CHECK_THROWS_AS(mha(t, t.constant(random_tensor(1, 3, rng)),
                      t.constant(random_tensor(2, 3, rng)),
                      t.constant(random_tensor(2, 3, rng)), 2,
                      t.constant(identity(3))),
                  ShapeError);
}

TEST_CASE("mha with zero mask and one head equals plain scaled dot-product") {
  DTape t(false);
  Rng rng(6);
  int m = 3, d = 4;
  auto Q = t.constant(random_tensor(1, d, rng));
  auto K = t.constant(random_tensor(m, d, rng));
  auto V = t.constant(random_tensor(m, d, rng));
  auto Wo = t.constant(identity(d));
  Tensor2<double> zero_mask(1, m);
  auto a = mha(t, Q, K, V, 1, Wo, t.own_mask(zero_mask));

  auto scores = t.scale(t.matmul_nt(Q, K), 1.0 / std::sqrt(double(d)));
  auto ref = t.matmul(t.softmax_rows(scores, nullptr), V);
  for (int j = 0; j < d; ++j)
    CHECK(t.value(a).at(0, j) == doctest::Approx(t.value(ref).at(0, j)).epsilon(1e-15));
}

TEST_CASE("layer_norm examples") {
  DTape t(false);
  Tensor2<double> x(1, 4);
  x.fill(3.7);
  Tensor2<double> gain(1, 4), shift(1, 4);
  gain.fill(1.0);
  auto y = t.layer_norm(t.constant(x), t.constant(gain), t.constant(shift));
  for (double v : t.value(y).data) CHECK(std::abs(v) <= 1e-9);

  Rng rng(7);
  Tensor2<double> r = random_tensor(3, 8, rng);
  Tensor2<double> shift2(1, 8);
  shift2.fill(0.25);
  auto y2 = t.layer_norm(t.constant(r), t.constant(Tensor2<double>(1, 8)),
                         t.constant(shift2));
  // gain 0 leaves only the shift; with gain 1, row means land on the shift
  Tensor2<double> gain8(1, 8);
  gain8.fill(1.0);
  auto y3 = t.layer_norm(t.constant(r), t.constant(gain8), t.constant(shift2));
  for (int i = 0; i < 3; ++i) {
    double mean = 0;
    for (int j = 0; j < 8; ++j) mean += t.value(y3).at(i, j);
    CHECK(mean / 8 == doctest::Approx(0.25).epsilon(1e-6));
  }
  (void)y2;

  // idempotence: LN(LN(x)) == LN(x) for gain 1, shift 0. Unit-scale rows keep
  // the epsilon-induced drift below the contract tolerance.
  Tensor2<double> wide = random_tensor(3, 32, rng, 1.7);
  Tensor2<double> gain32(1, 32), zero_shift(1, 32);
  gain32.fill(1.0);
  auto once = t.layer_norm(t.constant(wide), t.constant(gain32), t.constant(zero_shift));
  auto twice = t.layer_norm(once, t.constant(gain32), t.constant(zero_shift));
  for (size_t i = 0; i < t.value(once).data.size(); ++i)
    CHECK(std::abs(t.value(once).data[i] - t.value(twice).data[i]) <= 1e-5);
}

TEST_CASE("backward: analytic gradients for simple graphs") {
  // loss = sum(x W) -> dW = x^T 1
  Rng rng(8);
  ParamStore<double> store;
  store.add("W", random_tensor(3, 2, rng));
  Tensor2<double> x = random_tensor(2, 3, rng);
  GradBuffer<double> grads;
  grads.reset(store);
  {
    DTape t(true);
    ParamVars<double> pv(t, store);
    Tensor2<double> ones(2, 2);
    ones.fill(1.0);
    t.backward(t.weighted_sum(t.matmul(t.constant(x), pv("W")), ones), grads);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      double expect = x.at(0, i) + x.at(1, i);
      CHECK(grads.g[0].at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }

  // f(x) = x^2 at x = 3 -> gradient 6
  ParamStore<double> store2;
  Tensor2<double> three(1, 1);
  three.data = {3.0};
  store2.add("x", three);
  GradBuffer<double> g2;
  g2.reset(store2);
  {
    DTape t(true);
    ParamVars<double> pv(t, store2);
    auto x1 = pv("x");
    Tensor2<double> one(1, 1);
    one.fill(1.0);
    t.backward(t.weighted_sum(t.mul_colvec(x1, x1), one), g2);
  }
  CHECK(g2.g[0].data[0] == doctest::Approx(6.0).epsilon(1e-12));

  DTape frozen(false);
  ParamStore<double> s3;
  s3.add("x", three);
  ParamVars<double> pv3(frozen, s3);
  GradBuffer<double> g3;
  g3.reset(s3);
  CHECK_THROWS_AS(frozen.backward(pv3("x"), g3), GradientUnavailable);
}

TEST_CASE("every differentiable op passes finite differences") {
  Rng rng(9);

  auto check = [&](const char* what, ParamStore<double>& store,
                   const std::function<Var(DTape&, ParamVars<double>&)>& build) {
    double err = fd_max_rel_err(store, build);
    INFO(what);
    CHECK(err <= 1e-3);
  };

  {
    ParamStore<double> s;
    s.add("A", random_tensor(3, 4, rng));
    s.add("B", random_tensor(4, 5, rng));
    Tensor2<double> w = random_tensor(3, 5, rng);
    check("matmul", s, [w](DTape& t, ParamVars<double>& pv) {
      return t.weighted_sum(t.matmul(pv("A"), pv("B")), w);
    });
  }
  {
    ParamStore<double> s;
    s.add("A", random_tensor(3, 4, rng));
    s.add("B", random_tensor(5, 4, rng));
    Tensor2<double> w = random_tensor(3, 5, rng);
    check("matmul_nt", s, [w](DTape& t, ParamVars<double>& pv) {
      return t.weighted_sum(t.matmul_nt(pv("A"), pv("B")), w);
    });
  }
  {
    ParamStore<double> s;
    s.add("A", random_tensor(3, 4, rng));
    s.add("b", random_tensor(1, 4, rng));
    Tensor2<double> w = random_tensor(3, 4, rng);
    check("add_rowvec+relu+tanh+sigmoid", s, [w](DTape& t, ParamVars<double>& pv) {
      auto x = t.add_rowvec(pv("A"), pv("b"));
      auto y = t.add(t.relu(x), t.add(t.tanh_op(x), t.sigmoid_op(x)));
      return t.weighted_sum(t.affine(y, 1.25, -0.5), w);
    });
  }
  {
    ParamStore<double> s;
    s.add("A", random_tensor(4, 6, rng));
    Tensor2<double> mask(4, 6);
    mask.at(0, 1) = kMaskSentinel<double>;
    mask.at(2, 5) = kMaskSentinel<double>;
    Tensor2<double> w = random_tensor(4, 6, rng);
    check("softmax_rows", s, [w, mask](DTape& t, ParamVars<double>& pv) {
      return t.weighted_sum(t.softmax_rows(pv("A"), t.own_mask(mask)), w);
    });
  }
  {
    ParamStore<double> s;
    s.add("A", random_tensor(3, 6, rng));
    s.add("g", random_tensor(1, 6, rng));
    s.add("s", random_tensor(1, 6, rng));
    Tensor2<double> w = random_tensor(3, 6, rng);
    check("layer_norm", s, [w](DTape& t, ParamVars<double>& pv) {
      return t.weighted_sum(t.layer_norm(pv("A"), pv("g"), pv("s")), w);
    });
  }
  {
    ParamStore<double> s;
    s.add("A", random_tensor(5, 4, rng));
    Tensor2<double> w = random_tensor(4, 4, rng);
    check("select+concat+slice+group_mean", s, [w](DTape& t, ParamVars<double>& pv) {
      auto sel = t.select_rows(pv("A"), {4, 0, 2});
      auto gm = t.group_mean_rows(pv("A"), {{0, 1, 2}, {3, 4}});
      auto cat = t.concat_rows({t.slice_cols(sel, 0, 4), gm});
      auto cc = t.concat_cols({t.slice_cols(cat, 0, 2), t.slice_cols(cat, 2, 2)});
      return t.weighted_sum(t.select_rows(cc, {0, 1, 2, 3}), w);
    });
  }
  {
    ParamStore<double> s;
    s.add("P", random_tensor(3, 4, rng, 0.25));
    s.add("c", random_tensor(3, 1, rng));
    Tensor2<double> w = random_tensor(3, 1, rng);
    check("mul_colvec+log_pick", s, [w](DTape& t, ParamVars<double>& pv) {
      auto sm = t.softmax_rows(pv("P"), nullptr);
      auto scaled = t.mul_colvec(sm, t.sigmoid_op(pv("c")));
      return t.weighted_sum(t.log_pick(scaled, {1, 0, 3}), w);
    });
  }
}

TEST_CASE("adam: zero grads, first-step magnitude, determinism, errors") {
  auto make_store = []() {
    ParamStore<float> s;
    Tensor2<float> t(2, 2);
    t.data = {1.0f, -2.0f, 3.0f, 0.5f};
    s.add("W", t);
    return s;
  };

  auto s1 = make_store();
  s1.zero_grads();
  CHECK_THROWS_AS(adam_step<float>(s1, 1e-3f, 0.9f, 0.999f, 1e-8f, 1),
                  GradientUnavailable);
  s1.mark_grads_populated();
  adam_step<float>(s1, 1e-3f, 0.9f, 0.999f, 1e-8f, 1);
  CHECK(s1.value("W").data == make_store().value("W").data);  // zero grad

  auto s2 = make_store();
  s2.zero_grads();
  s2.grad("W").fill(0.37f);
  s2.mark_grads_populated();
  adam_step<float>(s2, 1e-3f, 0.9f, 0.999f, 1e-8f, 1);
  for (size_t i = 0; i < 4; ++i) {
    float delta = make_store().value("W").data[i] - s2.value("W").data[i];
    CHECK(delta == doctest::Approx(1e-3).epsilon(1e-4));  // bias-corrected step ~ lr
  }

  auto s3 = make_store();
  s3.zero_grads();
  s3.grad("W").fill(0.37f);
  s3.mark_grads_populated();
  adam_step<float>(s3, 1e-3f, 0.9f, 0.999f, 1e-8f, 1);
  CHECK(s3.value("W").data == s2.value("W").data);  // identical runs
}
