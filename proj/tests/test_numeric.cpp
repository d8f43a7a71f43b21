#include "doctest.h"

#include "fgr/numeric.hpp"
#include "fgr/rng.hpp"

#include <cmath>
#include <set>

using namespace fgr;

TEST_CASE("softmax examples") {
  Vec a(2);
  a << 0, 0;
  CHECK(softmax(a).isApprox(Vec::Constant(2, 0.5)));

  Vec b = Vec::Constant(3, 7.25);
  const Vec pb = softmax(b);
  for (int i = 0; i < 3; ++i) CHECK(pb(i) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Vec c(2);
  c << 1000, 0;
  const Vec pc = softmax(c);
  CHECK(pc.allFinite());
  CHECK(pc(0) == doctest::Approx(1.0));
  CHECK(pc(1) < 1e-300);
}

TEST_CASE("softmax rejects empty and non-finite input") {
  CHECK_THROWS_AS(softmax(Vec(0)), std::invalid_argument);
  Vec v(2);
  v << 1, std::nan("");
  CHECK_THROWS_AS(softmax(v), std::invalid_argument);
  v << 1, INFINITY;
  CHECK_THROWS_AS(softmax(v), std::invalid_argument);
}

TEST_CASE("softmax is a probability vector on random logits") {
  RngStream rng(11, Purpose::training);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(40));
    Vec z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal(0, 1 + 50 * rng.uniform());
    const Vec p = softmax(z);
    CHECK((p.array() >= 0).all());
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("cross entropy examples") {
  Vec z(2);
  z << 1, 2;
  const double direct = -std::log(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0)));
  CHECK(cross_entropy(z, 0) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(cross_entropy(z, 0) == doctest::Approx(1.3132616875182228).epsilon(1e-14));

  Vec u = Vec::Constant(7, -2.5);
  CHECK(cross_entropy(u, 3) == doctest::Approx(std::log(7.0)).epsilon(1e-14));

  Vec d(3);
  d << 0, 800, 0;
  CHECK(cross_entropy(d, 1) == 0.0);

  CHECK_THROWS_AS(cross_entropy(z, 2), std::out_of_range);
  CHECK_THROWS_AS(cross_entropy(z, -1), std::out_of_range);
}

TEST_CASE("cross entropy gradient matches central differences") {
  RngStream rng(5, Purpose::training);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(10));
    Vec z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal(0, 2);
    const auto target = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    const Vec g = cross_entropy_grad(z, target);
    for (int i = 0; i < n; ++i) {
      Vec up = z, down = z;
      up(i) += h;
      down(i) -= h;
      const double fd = (cross_entropy(up, target) - cross_entropy(down, target)) / (2 * h);
      CHECK(relative_error(fd, g(i), 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("linear forward examples") {
  Vec x(3);
  x << 1.5, -2, 0.25;
  CHECK(linear_forward(Mat::Identity(3, 3), Vec::Zero(3), x) == x);
  CHECK_THROWS_AS(linear_forward(Mat::Identity(2, 3), Vec::Zero(3), x), std::invalid_argument);
  CHECK_THROWS_AS(linear_forward(Mat::Identity(3, 2), Vec::Zero(3), x), std::invalid_argument);

  const Mat W = Mat::Random(4, 3);
  const auto g = linear_backward(W, x, Vec::Ones(4));
  CHECK(g.db == Vec::Ones(4));
}

TEST_CASE("linear backward matches central differences") {
  RngStream rng(17, Purpose::training);
  const double h = 1e-5;
  const int out = 4, in = 5;
  Mat W(out, in);
  Vec b(out), x(in), a(out);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.normal();
  for (int i = 0; i < out; ++i) b(i) = rng.normal(), a(i) = rng.normal();
  for (int i = 0; i < in; ++i) x(i) = rng.normal();
  auto loss = [&](const Mat& W_, const Vec& b_, const Vec& x_) {
    return a.dot(linear_forward(W_, b_, x_).array().tanh().matrix());
  };
  const Vec y = linear_forward(W, b, x);
  const Vec dy = (a.array() * (1 - y.array().tanh().square())).matrix();
  const auto g = linear_backward(W, x, dy);

  double worst = 0;
  for (Eigen::Index i = 0; i < W.size(); ++i) {
    Mat up = W, down = W;
    up.data()[i] += h;
    down.data()[i] -= h;
    worst = std::max(worst, relative_error((loss(up, b, x) - loss(down, b, x)) / (2 * h), g.dW.data()[i], 1e-8));
  }
  for (int i = 0; i < out; ++i) {
    Vec up = b, down = b;
    up(i) += h;
    down(i) -= h;
    worst = std::max(worst, relative_error((loss(W, up, x) - loss(W, down, x)) / (2 * h), g.db(i), 1e-8));
  }
  for (int i = 0; i < in; ++i) {
    Vec up = x, down = x;
    up(i) += h;
    down(i) -= h;
    worst = std::max(worst, relative_error((loss(W, b, up) - loss(W, b, down)) / (2 * h), g.dx(i), 1e-8));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("sgd step") {
  Mat p = Mat::Constant(1, 1, 1.0);
  Mat g = Mat::Constant(1, 1, 2.0);
  sgd_step(p, g, 0.1, "w");
  CHECK(p(0, 0) == doctest::Approx(0.8).epsilon(1e-15));

  Vec q = Vec::LinSpaced(4, -1, 1);
  const Vec before = q;
  sgd_step(q, Vec::Constant(4, 3.0), 0.0, "q");
  CHECK(q == before);

  Vec r1 = before, r2 = before;
  sgd_step(r1, Vec::Constant(4, 0.3), 0.05);
  sgd_step(r2, Vec::Constant(4, 0.3), 0.05);
  CHECK(r1 == r2);

  Vec bad = Vec::Zero(2);
  bad(1) = std::nan("");
  Vec target = Vec::Zero(2);
  try {
    sgd_step(target, bad, 0.1, "output_bias");
    FAIL("expected a domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("output_bias") != std::string::npos);
  }
  CHECK_THROWS_AS(sgd_step(target, Vec::Zero(3), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(target, Vec::Zero(2), -0.1), std::invalid_argument);
}

TEST_CASE("rng streams are reproducible and isolated") {
  RngStream a(42, Purpose::data), b(42, Purpose::data);
  for (int i = 0; i < 100; ++i) CHECK(a.engine()() == b.engine()());

  RngStream c(42, Purpose::data), d(42, Purpose::replay);
  std::set<std::uint64_t> first;
  for (int i = 0; i < 64; ++i) first.insert(c.engine()());
  int shared = 0;
  for (int i = 0; i < 64; ++i) shared += first.count(d.engine()()) ? 1 : 0;
  CHECK(shared == 0);

  // drawing on one stream does not shift another
  RngStream e(9, Purpose::training), f(9, Purpose::decoding), g(9, Purpose::decoding);
  for (int i = 0; i < 1000; ++i) e.uniform();
  CHECK(f.uniform() == g.uniform());

  RngStream parent(3, Purpose::kmeans);
  const auto before = RngStream(3, Purpose::kmeans).engine()();
  RngStream child = parent.fork(7);
  CHECK(parent.engine()() == before);
  CHECK(child.engine()() != RngStream(3, Purpose::kmeans).fork(8).engine()());
}

TEST_CASE("rng distributions") {
  RngStream rng(1, Purpose::data);
  CHECK(rng.normal(4.0, 0.0) == 4.0);
  const auto idx = rng.sample_without_replacement(20, 20);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 20);
  const std::vector<double> alpha{0.5, 0.5, 2.0};
  for (int i = 0; i < 100; ++i) {
    const auto w = rng.dirichlet(alpha);
    double s = 0;
    for (double v : w) {
      CHECK(v >= 0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  double mean = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += rng.uniform();
  CHECK(std::abs(mean / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
}
