#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cmcf/group.hpp"

using namespace cmcf;

namespace {

Point pt(std::initializer_list<double> vals) {
  Point p(static_cast<int>(vals.size()));
  int i = 0;
  for (double v : vals) p[i++] = v;
  return p;
}

Point random_point(int n, std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  Point p(n);
  for (int i = 0; i < n; ++i) p[i] = uni(rng);
  return p;
}

// Independent oracle for heisenberg(1): upper unitriangular 3x3 matrices.
// exp coords (x1, x2, x3) <-> [[1, x1, x3 + x1 x2 / 2], [0, 1, x2], [0,0,1]].
Point h1_matrix_product(const Point& a, const Point& b) {
  auto to_mat = [](const Point& p) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 1) = p[0];
    m(1, 2) = p[1];
    m(0, 2) = p[2] + 0.5 * p[0] * p[1];
    return m;
  };
  Eigen::Matrix3d m = to_mat(a) * to_mat(b);
  Point out(3);
  out[0] = m(0, 1);
  out[1] = m(1, 2);
  out[2] = m(0, 2) - 0.5 * m(0, 1) * m(1, 2);
  return out;
}

// Coefficient-table realisation of X_i acting on a callable, with central
// coordinate differences. Independent of apply_vf (re-implemented here so
// group tests stand alone).
double coeff_derivative(const CarnotGroup& g, Frame f, int i,
                        const std::function<double(const Point&)>& fn,
                        const Point& x, double h = 1e-4) {
  const Eigen::VectorXd a = g.vf_coeffs(f, i, x);
  double acc = 0.0;
  for (int k = 0; k < g.dim(); ++k) {
    if (a[k] == 0.0) continue;
    Point xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    acc += a[k] * (fn(xp) - fn(xm)) / (2.0 * h);
  }
  return acc;
}

double test_poly(const Point& x) {
  double v = 0.0;
  for (int i = 0; i < x.size(); ++i) v += (i + 1) * x[i] * x[i];
  v += x[0] * x[x.size() - 1] + 0.5 * x[0] * x[1] * x[1];
  return v;
}

}  // namespace

TEST_CASE("presets expand to the advertised stratifications") {
  CarnotGroup h1 = CarnotGroup::heisenberg(1);
  CHECK(h1.step() == 2);
  CHECK(h1.dim() == 3);
  CHECK(h1.horizontal_dim() == 2);
  CHECK(h1.gauge_exponent() == 4);
  CHECK(h1.c(0, 1, 2) == 1.0);
  CHECK(h1.c(1, 0, 2) == -1.0);

  CarnotGroup en = CarnotGroup::engel();
  CHECK(en.step() == 3);
  CHECK(en.dim() == 4);
  CHECK(en.horizontal_dim() == 2);
  CHECK(en.gauge_exponent() == 12);

  CarnotGroup eu = CarnotGroup::euclidean(3);
  CHECK(eu.step() == 1);
  CHECK(eu.dim() == 3);
  CHECK(eu.gauge_exponent() == 2);

  CHECK(CarnotGroup::from_preset("heisenberg:2").dim() == 5);
  CHECK(CarnotGroup::from_preset("euclidean:4").dim() == 4);
  CHECK(CarnotGroup::from_preset("engel").dim() == 4);
  CHECK_THROWS(CarnotGroup::from_preset("torus:1"));
  CHECK_THROWS(CarnotGroup::from_preset("heisenberg"));
}

TEST_CASE("heisenberg product matches the matrix-group oracle") {
  CarnotGroup g = CarnotGroup::heisenberg(1);
  Point a = pt({1, 0, 0}), b = pt({0, 1, 0});
  Point prod = g.multiply(a, b);
  CHECK(prod[0] == doctest::Approx(1.0));
  CHECK(prod[1] == doctest::Approx(1.0));
  CHECK(prod[2] == doctest::Approx(0.5));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Point x = random_point(3, rng), y = random_point(3, rng);
    Point got = g.multiply(x, y);
    Point want = h1_matrix_product(x, y);
    CHECK((got - want).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("identity and inverses") {
  for (const char* preset : {"heisenberg:1", "engel", "euclidean:2"}) {
    CarnotGroup g = CarnotGroup::from_preset(preset);
    std::mt19937_64 rng(11);
    Point zero = Point::Zero(g.dim());
    for (int trial = 0; trial < 25; ++trial) {
      Point x = random_point(g.dim(), rng);
      CHECK((g.multiply(x, zero) - x).lpNorm<Eigen::Infinity>() == 0.0);
      CHECK(g.multiply(x, g.inverse(x)).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
  CarnotGroup g = CarnotGroup::euclidean(3);
  CHECK((g.inverse(pt({1, 2, 3})) - pt({-1, -2, -3}))
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(g.inverse(Point::Zero(3)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("associativity holds to rounding") {
  for (const char* preset : {"heisenberg:1", "heisenberg:2", "engel"}) {
    CarnotGroup g = CarnotGroup::from_preset(preset);
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
      Point x = random_point(g.dim(), rng);
      Point y = random_point(g.dim(), rng);
      Point z = random_point(g.dim(), rng);
      Point lhs = g.multiply(g.multiply(x, y), z);
      Point rhs = g.multiply(x, g.multiply(y, z));
      CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
}

TEST_CASE("dilations scale by the layer weights") {
  CarnotGroup h1 = CarnotGroup::heisenberg(1);
  CHECK((h1.dilate(2.0, pt({1, 1, 1})) - pt({2, 2, 4}))
            .lpNorm<Eigen::Infinity>() == 0.0);
  std::mt19937_64 rng(3);
  Point x = random_point(3, rng);
  CHECK((h1.dilate(1.0, x) - x).lpNorm<Eigen::Infinity>() == 0.0);

  CarnotGroup en = CarnotGroup::engel();
  CHECK(en.dilate(3.0, pt({0, 0, 0, 1}))[3] == doctest::Approx(27.0));
  CHECK_THROWS(h1.dilate(0.0, x));
  CHECK_THROWS(h1.dilate(-1.0, x));
}

TEST_CASE("gauge norm values and homogeneity") {
  CarnotGroup h1 = CarnotGroup::heisenberg(1);
  CHECK(h1.gauge_norm(pt({1, 0, 0})) == doctest::Approx(1.0));
  CHECK(h1.gauge_norm(pt({0, 0, 1})) == doctest::Approx(1.0));
  CHECK(h1.gauge_norm(pt({1, 1, 1})) ==
        doctest::Approx(std::pow(3.0, 0.25)));
  CHECK(h1.gauge_norm(Point::Zero(3)) == 0.0);

  for (const char* preset : {"heisenberg:1", "engel", "euclidean:3"}) {
    CarnotGroup g = CarnotGroup::from_preset(preset);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> s_dist(0.1, 5.0);
    for (int trial = 0; trial < 40; ++trial) {
      Point x = random_point(g.dim(), rng);
      double s = s_dist(rng);
      double lhs = g.gauge_norm(g.dilate(s, x));
      double rhs = s * g.gauge_norm(x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("left and right distances are translation invariant") {
  CarnotGroup g = CarnotGroup::heisenberg(1);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    Point x = random_point(3, rng), y = random_point(3, rng),
          z = random_point(3, rng);
    CHECK(g.left_distance(x, x) == 0.0);
    CHECK(g.left_distance(g.multiply(z, x), g.multiply(z, y)) ==
          doctest::Approx(g.left_distance(x, y)).epsilon(1e-10));
    CHECK(g.right_distance(g.multiply(x, z), g.multiply(y, z)) ==
          doctest::Approx(g.right_distance(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("left frame coefficients match the closed forms") {
  CarnotGroup h1 = CarnotGroup::heisenberg(1);
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    Point x = random_point(3, rng);
    Eigen::VectorXd a1 = h1.vf_coeffs(Frame::Left, 0, x);
    CHECK(a1[0] == 1.0);
    CHECK(a1[1] == 0.0);
    CHECK(a1[2] == doctest::Approx(-0.5 * x[1]).epsilon(1e-14));
    Eigen::VectorXd a2 = h1.vf_coeffs(Frame::Left, 1, x);
    CHECK(a2[2] == doctest::Approx(0.5 * x[0]).epsilon(1e-14));
  }

  CarnotGroup en = CarnotGroup::engel();
  for (int trial = 0; trial < 10; ++trial) {
    Point x = random_point(4, rng);
    // X_1 = d_1 - (x2/2) d_3 - (x3/2 + x1 x2 / 12) d_4
    Eigen::VectorXd a1 = en.vf_coeffs(Frame::Left, 0, x);
    CHECK(a1[0] == 1.0);
    CHECK(a1[2] == doctest::Approx(-0.5 * x[1]).epsilon(1e-13));
    CHECK(a1[3] ==
          doctest::Approx(-0.5 * x[2] - x[0] * x[1] / 12.0).epsilon(1e-13));
    // X_2 = d_2 + (x1/2) d_3 + (x1^2/12) d_4
    Eigen::VectorXd a2 = en.vf_coeffs(Frame::Left, 1, x);
    CHECK(a2[1] == 1.0);
    CHECK(a2[2] == doctest::Approx(0.5 * x[0]).epsilon(1e-13));
    CHECK(a2[3] == doctest::Approx(x[0] * x[0] / 12.0).epsilon(1e-13));
    // X_3 = d_3 + (x1/2) d_4
    Eigen::VectorXd a3 = en.vf_coeffs(Frame::Left, 2, x);
    CHECK(a3[2] == 1.0);
    CHECK(a3[3] == doctest::Approx(0.5 * x[0]).epsilon(1e-13));
    CHECK(en.vf_coeffs(Frame::Left, 3, x)[3] == 1.0);
  }

  // At the origin every polynomial vanishes.
  for (const char* preset : {"heisenberg:1", "engel"}) {
    CarnotGroup g = CarnotGroup::from_preset(preset);
    for (int i = 0; i < g.dim(); ++i) {
      Eigen::VectorXd a = g.vf_coeffs(Frame::Left, i, Point::Zero(g.dim()));
      Eigen::VectorXd e = Eigen::VectorXd::Zero(g.dim());
      e[i] = 1.0;
      CHECK((a - e).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
  CHECK_THROWS(h1.vf_coeffs(Frame::Left, 3, Point::Zero(3)));
}

TEST_CASE("right frame flips the linear term and matches euclidean") {
  CarnotGroup h1 = CarnotGroup::heisenberg(1);
  std::mt19937_64 rng(31);
  Point x = random_point(3, rng);
  Eigen::VectorXd r1 = h1.vf_coeffs(Frame::Right, 0, x);
  CHECK(r1[2] == doctest::Approx(+0.5 * x[1]).epsilon(1e-14));
  CHECK((h1.vf_coeffs(Frame::Right, 1, Point::Zero(3)) -
         pt({0, 1, 0})).lpNorm<Eigen::Infinity>() == 0.0);

  CarnotGroup eu = CarnotGroup::euclidean(3);
  for (int i = 0; i < 3; ++i) {
    Point y = random_point(3, rng);
    CHECK((eu.vf_coeffs(Frame::Right, i, y) -
           eu.vf_coeffs(Frame::Left, i, y)).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("coefficient fields realise left invariance") {
  for (const char* preset : {"heisenberg:1", "engel"}) {
    CarnotGroup g = CarnotGroup::from_preset(preset);
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 5; ++trial) {
      Point x = random_point(g.dim(), rng, 1.0);
      Point z = random_point(g.dim(), rng, 1.0);
      for (int i = 0; i < g.horizontal_dim(); ++i) {
        auto composed = [&](const Point& p) {
          return test_poly(g.multiply(z, p));
        };
        double lhs = coeff_derivative(g, Frame::Left, i, composed, x);
        double rhs = coeff_derivative(g, Frame::Left, i, test_poly,
                                      g.multiply(z, x));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("left and right fields commute, brackets recover the table") {
  for (const char* preset : {"heisenberg:1", "engel"}) {
    CarnotGroup g = CarnotGroup::from_preset(preset);
    std::mt19937_64 rng(41);
    const double h = 1e-3;
    for (int trial = 0; trial < 3; ++trial) {
      Point x = random_point(g.dim(), rng, 1.0);
      for (int i = 0; i < g.horizontal_dim(); ++i)
        for (int j = 0; j < g.horizontal_dim(); ++j) {
          auto xf = [&](const Point& p) {
            return coeff_derivative(g, Frame::Left, j, test_poly, p, h);
          };
          auto xtf = [&](const Point& p) {
            return coeff_derivative(g, Frame::Right, j, test_poly, p, h);
          };
          // commutation with the right frame
          auto xf_right = [&](const Point& p) {
            return coeff_derivative(g, Frame::Left, i, test_poly, p, h);
          };
          double lr = coeff_derivative(g, Frame::Left, i, xtf, x, h);
          double rl = coeff_derivative(g, Frame::Right, j, xf_right, x, h);
          CHECK(lr == doctest::Approx(rl).epsilon(1e-4).scale(1.0));

          // bracket recovery
          auto xif = [&](const Point& p) {
            return coeff_derivative(g, Frame::Left, i, test_poly, p, h);
          };
          double comm = coeff_derivative(g, Frame::Left, i, xf, x, h) -
                        coeff_derivative(g, Frame::Left, j, xif, x, h);
          double expect = 0.0;
          for (int k = 0; k < g.dim(); ++k)
            if (g.c(i, j, k) != 0.0)
              expect += g.c(i, j, k) *
                        coeff_derivative(g, Frame::Left, k, test_poly, x, h);
          CHECK(comm == doctest::Approx(expect).epsilon(1e-4).scale(1.0));
        }
    }
  }
}

TEST_CASE("verify_structure passes presets and catches injected defects") {
  StructureReport h1 = CarnotGroup::heisenberg(1).verify_structure();
  CHECK(h1.passed);
  CHECK(h1.span_rank == 3);
  CHECK(h1.bracket_depth == 2);

  StructureReport en = CarnotGroup::engel().verify_structure();
  CHECK(en.passed);
  CHECK(en.span_rank == 4);
  CHECK(en.bracket_depth == 3);

  StructureReport eu = CarnotGroup::euclidean(2).verify_structure();
  CHECK(eu.passed);
  CHECK(eu.span_rank == 2);

  CarnotGroup defect({2, 1});
  defect.set_raw_constant(0, 1, 2, 1.0);
  defect.set_raw_constant(1, 0, 2, -0.5);  // breaks anti-symmetry
  StructureReport rep = defect.verify_structure();
  CHECK_FALSE(rep.passed);
  REQUIRE(!rep.violations.empty());
  CHECK(rep.violations.front().find("anti-symmetry") != std::string::npos);
}

TEST_CASE("quasi-triangle constant is reported, not assumed") {
  CarnotGroup g = CarnotGroup::heisenberg(1);
  double k = g.empirical_quasi_triangle_constant(500, 9);
  CHECK(k > 0.0);
  CHECK(k < 10.0);
}
