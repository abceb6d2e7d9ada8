#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "testutil.hpp"

using namespace flagopt;
using Catch::Approx;

namespace {

/// Brute-force 1-d prox oracle: grid minimization of lambda*|y| + (L/2)(y-v)^2
/// over [lo, hi].
double grid_prox_1d(double v, double lambda, double L, double lo, double hi) {
    double best_y = lo, best_val = std::numeric_limits<double>::infinity();
    const int steps = 400000;
    for (int i = 0; i <= steps; ++i) {
        const double y = lo + (hi - lo) * double(i) / double(steps);
        const double val = lambda * std::abs(y) + 0.5 * L * (y - v) * (y - v);
        if (val < best_val) {
            best_val = val;
            best_y = y;
        }
    }
    return best_y;
}

}  // namespace

TEST_CASE("prox closed forms") {
    SECTION("zero nonsmooth part on the full space is a gradient step") {
        Matrix A = testutil::random_matrix(6, 4, 5);
        auto p = CompositeProblem::least_squares(A, testutil::random_vector(6, 6),
                                                 NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(4));
        Vector x = testutil::random_vector(4, 7);
        Vector expect = x - p.smooth_grad(x) / p.lipschitz();
        REQUIRE((prox(p, x) - expect).norm() == 0.0);
    }
    SECTION("1-d soft threshold matches the grid oracle") {
        Matrix A(1, 1);
        A << 1.0;
        Vector b(1);
        b << 1.0;
        auto p = CompositeProblem::least_squares(A, b, NonsmoothPart::l1(0.4),
                                                 FeasibleSet::full_space(1))
                     .with_lipschitz(1.0);
        Vector x(1);
        x << 1.0;  // v = x - grad/L = 1
        const Vector out = prox(p, x);
        REQUIRE(out[0] == Approx(0.6).epsilon(1e-12));
        REQUIRE(out[0] == Approx(grid_prox_1d(1.0, 0.4, 1.0, -2.0, 2.0)).margin(2e-5));
    }
    SECTION("thresholding to exactly zero") {
        Matrix A(1, 1);
        A << 1.0;
        Vector b(1);
        b << 0.3;
        auto p = CompositeProblem::least_squares(A, b, NonsmoothPart::l1(0.5),
                                                 FeasibleSet::full_space(1))
                     .with_lipschitz(1.0);
        Vector x(1);
        x << 0.3;  // v = 0.3, threshold 0.5
        REQUIRE(prox(p, x)[0] == 0.0);
    }
    SECTION("box projection clips the gradient step") {
        Vector v(3);
        v << -0.5, 0.3, 2.0;
        auto p = CompositeProblem::least_squares(Matrix::Identity(3, 3), v,
                                                 NonsmoothPart::zero(),
                                                 FeasibleSet::box(3, 0.0, 1.0))
                     .with_lipschitz(1.0);
        const Vector out = prox(p, Vector::Zero(3));
        Vector expect(3);
        expect << 0.0, 0.3, 1.0;
        REQUIRE((out - expect).norm() == 0.0);
    }
}

TEST_CASE("gradient mapping") {
    SECTION("equals the smooth gradient when h = 0 unconstrained") {
        Matrix A = testutil::random_matrix(5, 3, 8);
        auto p = CompositeProblem::least_squares(A, testutil::random_vector(5, 9),
                                                 NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(3));
        Vector x = testutil::random_vector(3, 10);
        REQUIRE((gradient_mapping(p, x) - p.smooth_grad(x)).norm() <= 1e-12);
    }
    SECTION("vanishes at the unconstrained minimizer") {
        Vector b(2);
        b << 1.0, -2.0;
        auto p = CompositeProblem::least_squares(Matrix::Identity(2, 2), b,
                                                 NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(2));
        REQUIRE(gradient_mapping(p, b).norm() <= 1e-12);
    }
    SECTION("vanishes at a constrained stationary point on the box boundary") {
        Matrix A(1, 1);
        A << 1.0;
        auto p = CompositeProblem::least_squares(A, Vector::Zero(1), NonsmoothPart::zero(),
                                                 FeasibleSet::box(1, 1.0, 2.0))
                     .with_lipschitz(1.0);
        Vector x(1);
        x << 1.0;  // prox = project(0) = 1 = x
        REQUIRE(gradient_mapping(p, x).norm() == 0.0);
        // Grid oracle: F is increasing on [1,2], so 1 is the constrained optimum.
        double best = 1.0, best_val = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 1000; ++i) {
            const double y = 1.0 + double(i) / 1000.0;
            if (0.5 * y * y < best_val) {
                best_val = 0.5 * y * y;
                best = y;
            }
        }
        REQUIRE(best == 1.0);
    }
}

TEST_CASE("mirror step") {
    MetricDiag metric{Vector::Ones(2), 0.0};
    SECTION("zero direction is a fixed point") {
        Vector z(2);
        z << 0.4, -0.2;
        REQUIRE(mirror_step(z, Vector::Zero(2), 1.0, metric, FeasibleSet::full_space(2)) == z);
    }
    SECTION("full-space stationarity of the separable quadratic") {
        Vector z = Vector::Zero(2);
        Vector p(2);
        p << 1.0, 2.0;
        Vector expect(2);
        expect << -1.0, -2.0;
        REQUIRE((mirror_step(z, p, 1.0, metric, FeasibleSet::full_space(2)) - expect).norm() ==
                0.0);
    }
    SECTION("box clamp after the metric step") {
        Vector z(2), p(2), expect(2);
        z << 0.1, 0.9;
        p << 1.0, -1.0;
        expect << 0.0, 1.0;
        REQUIRE((mirror_step(z, p, 1.0, metric, FeasibleSet::box(2, 0.0, 1.0)) - expect)
                    .norm() == 0.0);
    }
    SECTION("variational optimality against sampled feasible points") {
        auto set = FeasibleSet::box(4, -1.0, 2.0);
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 20; ++trial) {
            Vector z = set.sample(rng);
            Vector p = testutil::random_vector(4, rng());
            Vector s = testutil::random_vector(4, rng()).cwiseAbs();
            MetricDiag m{s, 1e-3};
            const double eta = 0.7;
            Vector zn = mirror_step(z, p, eta, m, set);
            REQUIRE(set.contains(zn));
            for (int j = 0; j < 50; ++j) {
                Vector u = set.sample(rng);
                const Vector resid =
                    eta * p + ((m.s.array() + m.delta) * (zn - z).array()).matrix();
                REQUIRE(resid.dot(u - zn) >= -1e-8);
            }
        }
    }
    SECTION("preconditions") {
        Vector z = Vector::Zero(2), p = Vector::Ones(2);
        REQUIRE_THROWS_AS(mirror_step(z, p, 0.0, metric, FeasibleSet::full_space(2)),
                          std::invalid_argument);
        MetricDiag degenerate{Vector::Zero(2), 0.0};
        REQUIRE_THROWS_AS(mirror_step(z, p, 1.0, degenerate, FeasibleSet::full_space(2)),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(MetricDiag(Vector::Constant(2, -1.0), 0.1), std::invalid_argument);
    }
}

TEST_CASE("metric update") {
    const Index d = 5;
    SECTION("single basis vector") {
        auto [acc, s] = metric_update(Vector::Zero(d), Vector::Unit(d, 0));
        REQUIRE(s[0] == 1.0);
        REQUIRE(s.tail(d - 1).norm() == 0.0);
        auto [acc2, s2] = metric_update(acc, Vector::Unit(d, 0));
        REQUIRE(s2[0] == Approx(std::sqrt(2.0)));
        REQUIRE(s2.tail(d - 1).norm() == 0.0);
        (void)acc2;
    }
    SECTION("uniform unit vector") {
        Vector g = Vector::Constant(d, 1.0 / std::sqrt(double(d)));
        auto [acc, s] = metric_update(Vector::Zero(d), g);
        (void)acc;
        for (Index i = 0; i < d; ++i) REQUIRE(s[i] == Approx(1.0 / std::sqrt(double(d))));
    }
    SECTION("matches explicit stacked-matrix row norms") {
        std::mt19937_64 rng(31);
        const int k = 12;
        Matrix G(d, k);
        Vector acc = Vector::Zero(d);
        Vector s;
        for (int j = 0; j < k; ++j) {
            Vector g = testutil::random_vector(d, rng()).normalized();
            G.col(j) = g;
            std::tie(acc, s) = metric_update(acc, g);
        }
        for (Index i = 0; i < d; ++i) REQUIRE(s[i] == Approx(G.row(i).norm()).margin(1e-12));
    }
    SECTION("rejects non-unit vectors") {
        REQUIRE_THROWS_AS(metric_update(Vector::Zero(d), Vector::Constant(d, 1.0)),
                          std::invalid_argument);
    }
    SECTION("accumulator is coordinatewise nondecreasing") {
        std::mt19937_64 rng(41);
        Vector acc = Vector::Zero(d), s_prev = Vector::Zero(d);
        for (int j = 0; j < 10; ++j) {
            auto [acc_next, s] = metric_update(acc, testutil::random_vector(d, rng()).normalized());
            REQUIRE((s.array() >= s_prev.array() - 1e-15).all());
            acc = acc_next;
            s_prev = s;
        }
    }
}

TEST_CASE("prox properties on generated instances") {
    std::vector<ProblemDescriptor> descriptors;
    descriptors.push_back(testutil::reference_lasso_descriptor());
    {
        ProblemDescriptor logit;
        logit.generator = "logistic_l1";
        logit.seed = 12;
        logit.n = 30;
        logit.d = 10;
        logit.lambda = 0.05;
        logit.box_lower = -2.0;
        logit.box_upper = 2.0;
        descriptors.push_back(logit);
    }
    {
        ProblemDescriptor qp;
        qp.generator = "box_qp";
        qp.seed = 13;
        qp.n = 15;
        qp.d = 15;
        descriptors.push_back(qp);
    }

    for (const auto& desc : descriptors) {
        DYNAMIC_SECTION("generator " << desc.generator) {
            const CompositeProblem p = generate_problem(desc);
            const double L = p.lipschitz();
            std::mt19937_64 rng(desc.seed + 500);

            SECTION("outputs feasible, 2-Lipschitz, and descending") {
                for (int trial = 0; trial < 200; ++trial) {
                    const Vector x = p.set().sample(rng);
                    const Vector y = p.set().sample(rng);
                    const Vector px = prox(p, x);
                    const Vector py = prox(p, y);
                    REQUIRE(p.set().contains(px, 1e-12));
                    REQUIRE((px - py).norm() <= 2.0 * (x - y).norm() + 1e-9);
                    const double fx = eval_F(p, x);
                    REQUIRE(eval_F(p, px) <=
                            fx - 0.5 * L * (x - px).squaredNorm() + 1e-9 * std::abs(fx) + 1e-9);
                }
            }
            SECTION("full gradient-mapping inequality") {
                for (int trial = 0; trial < 200; ++trial) {
                    const Vector x = p.set().sample(rng);
                    const Vector y = p.set().sample(rng);
                    const Vector px = prox(p, x);
                    const double rhs = eval_F(p, y) + L * (px - x).dot(y - x) -
                                       0.5 * L * (x - px).squaredNorm();
                    REQUIRE(eval_F(p, px) <= rhs + 1e-9 * std::abs(rhs) + 1e-9);
                }
            }
        }
    }
}
