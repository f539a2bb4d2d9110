#include "gnn/network.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace gnn;
using gnn::testing::random_network;
using gnn::testing::rel_diff;
using Catch::Approx;

TEST_CASE("single tanh unit at the origin") {
  ShallowNetwork net{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {}};
  const auto s = eval_stack(net, Eigen::MatrixXd::Zero(1, 1), 2);
  CHECK(s.values[0] == 0.0);
  CHECK(s.gradient(0, 0) == Approx(1.0).epsilon(1e-15));
  CHECK(s.second(0, 0) == Approx(0.0).margin(1e-15));

  const auto g = param_gradient_stack(net, Eigen::MatrixXd::Zero(1, 1), 0);
  CHECK(g.db[0].values[0] == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("zero output coefficients give zero fields and gradients") {
  std::mt19937_64 rng(3);
  auto net = random_network(rng, 2, 5);
  net.c.setZero();
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(7, 2);
  const auto s = eval_stack(net, X, 2);
  CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.gradient.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.second.cwiseAbs().maxCoeff() == 0.0);
  const auto g = param_gradient_stack(net, X, 2);
  for (const auto& f : g.db) CHECK(f.second.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& f : g.dW) CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("activation derivatives match finite differences") {
  const double h = 1e-5;
  for (const double beta : {0.5, 1.0, 3.0, 13.0}) {
    const Activation act{ActivationBase::tanh, beta};
    for (int k = 0; k < 20; ++k) {
      const double t = -1.5 + 3.0 * k / 19.0 + 0.013;
      for (int m = 1; m <= 3; ++m) {
        const double fd = (act.derivative(m - 1, t + h) - act.derivative(m - 1, t - h)) / (2.0 * h);
        INFO("beta=" << beta << " t=" << t << " m=" << m);
        CHECK(rel_diff(act.derivative(m, t), fd, std::pow(beta, m)) < 1e-6);
      }
    }
  }
  // relu: first derivative away from the kink
  const Activation relu{ActivationBase::relu, 2.0};
  CHECK(relu.derivative(1, 0.3) == 2.0);
  CHECK(relu.derivative(1, -0.3) == 0.0);
  CHECK_THROWS_AS(relu.derivative(2, 0.3), std::invalid_argument);
}

TEST_CASE("activation jet agrees with scalar derivatives and stays finite") {
  const Activation act{ActivationBase::tanh, 7.0};
  Eigen::MatrixXd T(1, 6);
  T << -200.0, -3.0, -0.1, 0.0, 0.4, 500.0;
  const auto S = activation_jet(act, T, 3);
  for (int m = 0; m <= 3; ++m) {
    CHECK(S[static_cast<std::size_t>(m)].allFinite());
    for (Eigen::Index k = 0; k < T.cols(); ++k) {
      CHECK(S[static_cast<std::size_t>(m)](0, k) == Approx(act.derivative(m, T(0, k))).epsilon(1e-12).margin(1e-300));
    }
  }
}

TEST_CASE("second derivatives match differences of first derivatives") {
  std::mt19937_64 rng(11);
  const double h = 1e-5;
  for (int d = 1; d <= 2; ++d) {
    const auto net = random_network(rng, d, 8, 1.7);
    const Eigen::MatrixXd X = gnn::testing::random_points(rng, d == 1 ? Domain::interval(0, 1) : Domain::disk(1), 5);
    const auto s = eval_stack(net, X, 2);
    for (int k = 0; k < second_count(d); ++k) {
      const auto [a, b] = second_pair(d, k);
      Eigen::MatrixXd Xp = X;
      Eigen::MatrixXd Xm = X;
      Xp.col(b).array() += h;
      Xm.col(b).array() -= h;
      const Eigen::VectorXd fd =
          (eval_stack(net, Xp, 1).gradient.col(a) - eval_stack(net, Xm, 1).gradient.col(a)) / (2.0 * h);
      for (Eigen::Index r = 0; r < X.rows(); ++r) CHECK(rel_diff(s.second(r, k), fd[r], 1e-3) < 1e-6);
    }
    // gradients against differences of values
    for (int a = 0; a < d; ++a) {
      Eigen::MatrixXd Xp = X;
      Eigen::MatrixXd Xm = X;
      Xp.col(a).array() += h;
      Xm.col(a).array() -= h;
      const Eigen::VectorXd fd = (eval_stack(net, Xp, 0).values - eval_stack(net, Xm, 0).values) / (2.0 * h);
      for (Eigen::Index r = 0; r < X.rows(); ++r) CHECK(rel_diff(s.gradient(r, a), fd[r], 1e-3) < 1e-6);
    }
  }
}

TEST_CASE("evaluation is linear in the output coefficients") {
  std::mt19937_64 rng(5);
  auto n1 = random_network(rng, 2, 6);
  auto n2 = n1;
  n2.c = Eigen::VectorXd::Random(6);
  auto sum = n1;
  sum.c = n1.c + n2.c;
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(9, 2);
  const auto a = eval_stack(n1, X, 2);
  const auto b = eval_stack(n2, X, 2);
  const auto s = eval_stack(sum, X, 2);
  CHECK((s.values - a.values - b.values).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((s.gradient - a.gradient - b.gradient).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((s.second - a.second - b.second).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("parameter gradients match finite differences at every order") {
  std::mt19937_64 rng(17);
  const double h = 1e-5;
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 1 + trial % 2;
    const auto net = random_network(rng, d, 1 + trial, 1.0 + trial);
    const Eigen::MatrixXd X = gnn::testing::random_points(rng, d == 1 ? Domain::interval(0, 1) : Domain::disk(1), 6);
    const auto g = param_gradient_stack(net, X, 2);
    const Eigen::Index n = net.width();
    const auto compare = [&](const FieldSample& analytic, const ShallowNetwork& p, const ShallowNetwork& m) {
      const auto sp = eval_stack(p, X, 2);
      const auto sm = eval_stack(m, X, 2);
      const double scale = std::max(1.0, eval_stack(net, X, 2).second.cwiseAbs().maxCoeff());
      const auto err = [&](const Eigen::MatrixXd& an, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return ((a - b) / (2.0 * h) - an).cwiseAbs().maxCoeff() / scale;
      };
      CHECK(err(analytic.values, sp.values, sm.values) < 1e-5);
      CHECK(err(analytic.gradient, sp.gradient, sm.gradient) < 1e-5);
      CHECK(err(analytic.second, sp.second, sm.second) < 1e-5);
    };
    for (Eigen::Index j = 0; j < n; ++j) {
      auto p = net;
      auto m = net;
      p.b[j] += h;
      m.b[j] -= h;
      compare(g.db[static_cast<std::size_t>(j)], p, m);
      for (int e = 0; e < d; ++e) {
        p = net;
        m = net;
        p.W(e, j) += h;
        m.W(e, j) -= h;
        compare(g.dW[static_cast<std::size_t>(e * n + j)], p, m);
      }
    }
  }
}

TEST_CASE("unsupported derivative orders are rejected") {
  std::mt19937_64 rng(1);
  const auto relu = random_network(rng, 1, 3, 1.0, ActivationBase::relu);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Constant(2, 1, 0.3);
  CHECK_NOTHROW(eval_stack(relu, X, 1));
  CHECK_THROWS_AS(eval_stack(relu, X, 2), std::invalid_argument);
  CHECK_NOTHROW(param_gradient_stack(relu, X, 0));
  CHECK_THROWS_AS(param_gradient_stack(relu, X, 1), std::invalid_argument);
  const auto tanh_net = random_network(rng, 1, 3);
  CHECK_THROWS_AS(eval_stack(tanh_net, Eigen::MatrixXd::Zero(2, 2), 0), std::invalid_argument);
}

TEST_CASE("scaling the output") {
  std::mt19937_64 rng(8);
  const auto net = random_network(rng, 2, 4);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, 2);
  const auto base = eval_stack(net, X, 0).values;
  CHECK(eval_stack(scale_output(net, 1.0), X, 0).values == base);
  CHECK(eval_stack(scale_output(net, 0.0), X, 0).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(eval_stack(scale_output(net, 2.0), X, 0).values == 2.0 * base);
  CHECK_THROWS_AS(scale_output(net, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("hidden-parameter initialisation") {
  const auto u = init_hidden(InitStrategy::uniform_bias_1d, 4, 1, 0, Domain::interval(0, 1));
  CHECK(u.W == Eigen::MatrixXd::Ones(1, 4));
  CHECK(u.b[0] == Approx(-0.25));
  CHECK(u.b[1] == Approx(-0.5));
  CHECK(u.b[2] == Approx(-0.75));
  CHECK(u.b[3] == Approx(-1.0));

  const auto ad = init_hidden(InitStrategy::axis_diagonal_2d, 4, 2, 0, Domain::disk(1));
  for (int i = 0; i < 4; ++i) {
    CHECK(ad.W.col(i).norm() == Approx(1.0));
    for (int j = i + 1; j < 4; ++j) CHECK((ad.W.col(i) - ad.W.col(j)).norm() > 0.5);
  }

  const Domain box = Domain::l_shape();
  const auto bi = init_hidden(InitStrategy::box_init, 100, 2, 42, box);
  const auto [lo, hi] = box.bounding_box();
  for (Eigen::Index j = 0; j < 100; ++j) {
    double mn = 1e300;
    double mx = -1e300;
    for (int cx = 0; cx < 2; ++cx) {
      for (int cy = 0; cy < 2; ++cy) {
        const Eigen::Vector2d corner(cx ? hi[0] : lo[0], cy ? hi[1] : lo[1]);
        const double t = corner.dot(bi.W.col(j)) + bi.b[j];
        mn = std::min(mn, t);
        mx = std::max(mx, t);
      }
    }
    CHECK(mn <= 0.0);
    CHECK(mx >= 0.0);
  }
  const auto again = init_hidden(InitStrategy::box_init, 100, 2, 42, box);
  CHECK(again.W == bi.W);
  CHECK(again.b == bi.b);

  CHECK_THROWS_AS(init_hidden(InitStrategy::uniform_bias_1d, 4, 2, 0, Domain::disk(1)), std::invalid_argument);
  CHECK_THROWS_AS(init_hidden(InitStrategy::axis_diagonal_2d, 4, 1, 0, Domain::interval(0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(init_hidden(InitStrategy::box_init, 0, 1, 0, Domain::interval(0, 1)), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  std::mt19937_64 rng(23);
  for (int d = 1; d <= 2; ++d) {
    const auto net = random_network(rng, d, 7, 3.0 / 7.0);
    std::stringstream ss;
    write_checkpoint(ss, net);
    const auto back = read_checkpoint(ss);
    CHECK(back.W == net.W);
    CHECK(back.b == net.b);
    CHECK(back.c == net.c);
    CHECK(back.activation.scale == net.activation.scale);
    CHECK(back.activation.base == net.activation.base);
  }
  std::istringstream bad("something else");
  CHECK_THROWS(read_checkpoint(bad));
}

TEST_CASE("parameter norm") {
  ShallowNetwork net{Eigen::MatrixXd::Constant(1, 2, -3.0), Eigen::VectorXd::Constant(2, 0.5),
                     Eigen::VectorXd::Constant(2, 2.0), {}};
  CHECK(net.param_norm() == 5.5);
}
