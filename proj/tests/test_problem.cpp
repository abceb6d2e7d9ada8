#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SVD>
#include <random>

#include "testutil.hpp"

using namespace flagopt;
using Catch::Approx;
using testutil::random_matrix;

TEST_CASE("eval_F on pinned instances") {
    SECTION("zero point, zero nonsmooth part") {
        auto p = testutil::identity_quadratic(3);
        REQUIRE(eval_F(p, Vector::Zero(3)) == 0.0);
    }
    SECTION("l1 part adds weighted absolute values") {
        auto p = testutil::identity_quadratic(2, NonsmoothPart::l1(1.0));
        Vector x(2);
        x << 1.0, -1.0;
        REQUIRE(eval_F(p, x) == Approx(3.0).epsilon(1e-15));
    }
    SECTION("residual vanishes at the data point") {
        Vector b(2);
        b << 2.0, 0.0;
        auto p = CompositeProblem::least_squares(Matrix::Identity(2, 2), b,
                                                 NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(2));
        REQUIRE(eval_F(p, b) == 0.0);
    }
    SECTION("dimension mismatch is rejected") {
        auto p = testutil::identity_quadratic(3);
        REQUIRE_THROWS_AS(eval_F(p, Vector::Zero(2)), std::invalid_argument);
    }
}

TEST_CASE("estimate_lipschitz matches known spectra") {
    SECTION("identity matrix") {
        auto p = testutil::identity_quadratic(3);
        REQUIRE(estimate_lipschitz(p, 1e-6) == Approx(1.0).epsilon(1e-6));
    }
    SECTION("diagonal matrix, top singular value 2") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = 1.0;
        A(1, 1) = 2.0;
        auto p = CompositeProblem::least_squares(A, Vector::Zero(2), NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(2));
        REQUIRE(estimate_lipschitz(p, 1e-6) == Approx(4.0).epsilon(1e-6));
    }
    SECTION("diagonal Hessian 1..d gives L = d") {
        const Index d = 6;
        Matrix A = Matrix::Zero(d, d);
        for (Index i = 0; i < d; ++i) A(i, i) = std::sqrt(double(i + 1));
        auto p = CompositeProblem::least_squares(A, Vector::Zero(d), NonsmoothPart::zero(),
                                                 FeasibleSet::box(d, 0.0, 1.0));
        REQUIRE(estimate_lipschitz(p, 1e-6) == Approx(double(d)).epsilon(1e-6));
    }
    SECTION("random matrix agrees with a dense SVD oracle") {
        Matrix A = random_matrix(10, 5, 42);
        const double sigma_max = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
        auto p = CompositeProblem::least_squares(A, Vector::Zero(10), NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(5));
        REQUIRE(estimate_lipschitz(p, 1e-6) ==
                Approx(sigma_max * sigma_max).epsilon(2e-6));
    }
    SECTION("logistic curvature is a quarter of the quadratic one") {
        Matrix A = random_matrix(12, 4, 11);
        const double sigma_max = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
        Vector labels = Vector::Ones(12);
        auto p = CompositeProblem::logistic(A, labels, NonsmoothPart::zero(),
                                            FeasibleSet::full_space(4));
        REQUIRE(estimate_lipschitz(p, 1e-6) ==
                Approx(0.25 * sigma_max * sigma_max).epsilon(2e-6));
    }
    SECTION("stored constant carries the 1.01 safety factor") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = 1.0;
        A(1, 1) = 2.0;
        auto p = CompositeProblem::least_squares(A, Vector::Zero(2), NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(2));
        REQUIRE(p.lipschitz() == Approx(4.04).epsilon(1e-5));
    }
    SECTION("iteration cap raises a convergence error carrying the last estimate") {
        Matrix A = random_matrix(6, 6, 3);
        try {
            detail::spectral_norm_sq(A, 1e-14, 2);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            REQUIRE(e.last_estimate() > 0.0);
            REQUIRE(e.iterations() == 2);
        }
    }
}

TEST_CASE("projection") {
    SECTION("full space is the identity") {
        auto set = FeasibleSet::full_space(2);
        Vector v(2);
        v << 5.0, -5.0;
        REQUIRE(set.project(v) == v);
    }
    SECTION("box clamps coordinatewise") {
        auto set = FeasibleSet::box(2, 0.0, 1.0);
        Vector v(2);
        v << -0.5, 2.0;
        Vector expect(2);
        expect << 0.0, 1.0;
        REQUIRE(set.project(v) == expect);
        Vector interior(2);
        interior << 0.3, 0.7;
        REQUIRE(set.project(interior) == interior);
    }
    SECTION("idempotent and a contraction on random pairs") {
        auto set = FeasibleSet::box(5, -1.0, 2.0);
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 100; ++trial) {
            Vector u = testutil::random_vector(5, rng(), 3.0);
            Vector v = testutil::random_vector(5, rng(), 3.0);
            Vector pu = set.project(u), pv = set.project(v);
            REQUIRE(set.contains(pu));
            REQUIRE(set.project(pu) == pu);
            REQUIRE((pu - pv).norm() <= (u - v).norm() + 1e-12);
        }
    }
    SECTION("invalid box bounds are rejected") {
        Vector lo(2), hi(2);
        lo << 0.0, 3.0;
        hi << 1.0, 2.0;
        REQUIRE_THROWS_AS(FeasibleSet::box(lo, hi), std::invalid_argument);
    }
}

TEST_CASE("diameters") {
    SECTION("unit box") {
        auto d = FeasibleSet::box(7, 0.0, 1.0).diameters();
        REQUIRE(d.inf_sq == Approx(1.0));
        REQUIRE(d.two_sq == Approx(7.0));
    }
    SECTION("mixed-width box") {
        Vector lo(2), hi(2);
        lo << -2.0, 0.0;
        hi << 2.0, 1.0;
        auto d = FeasibleSet::box(lo, hi).diameters();
        REQUIRE(d.inf_sq == Approx(16.0));
        REQUIRE(d.two_sq == Approx(17.0));
    }
    SECTION("full space is unbounded") {
        auto d = FeasibleSet::full_space(3).diameters();
        REQUIRE(std::isinf(d.inf_sq));
        REQUIRE(std::isinf(d.two_sq));
    }
}

TEST_CASE("nonsmooth part") {
    REQUIRE_THROWS_AS(NonsmoothPart::l1(-0.1), std::invalid_argument);
    REQUIRE(NonsmoothPart::l1(0.0).kind() == NonsmoothKind::Zero);
    auto h = NonsmoothPart::l1(0.5);
    REQUIRE(h.value(Vector::Zero(4)) == 0.0);
    Vector x(2);
    x << -3.0, 4.0;
    REQUIRE(h.value(x) == Approx(3.5));
    REQUIRE(h.value(x) >= 0.0);
}

TEST_CASE("smooth part oracles on generated instances") {
    const std::vector<ProblemDescriptor> descriptors = [] {
        std::vector<ProblemDescriptor> all;
        auto lasso = testutil::reference_lasso_descriptor();
        all.push_back(lasso);
        ProblemDescriptor logit;
        logit.generator = "logistic_l1";
        logit.seed = 2;
        logit.n = 40;
        logit.d = 15;
        logit.lambda = 0.05;
        logit.box_lower = -3.0;
        logit.box_upper = 3.0;
        all.push_back(logit);
        ProblemDescriptor qp;
        qp.generator = "box_qp";
        qp.seed = 3;
        qp.n = 25;
        qp.d = 25;
        all.push_back(qp);
        return all;
    }();

    for (const auto& desc : descriptors) {
        DYNAMIC_SECTION("generator " << desc.generator) {
            const CompositeProblem p = generate_problem(desc);
            std::mt19937_64 rng(desc.seed + 100);

            SECTION("gradient matches central finite differences") {
                for (int trial = 0; trial < 20; ++trial) {
                    Vector x = p.set().sample(rng);
                    Vector g = p.smooth_grad(x);
                    Vector fd = testutil::numerical_grad(p, x);
                    REQUIRE((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
                }
            }
            SECTION("gradient is Lipschitz with the estimated constant") {
                const double lhat = estimate_lipschitz(p, 1e-6) * (1.0 + 1e-6);
                for (int trial = 0; trial < 100; ++trial) {
                    Vector x = p.set().sample(rng);
                    Vector y = p.set().sample(rng);
                    REQUIRE((p.smooth_grad(x) - p.smooth_grad(y)).norm() <=
                            lhat * (x - y).norm() + 1e-9);
                }
            }
            SECTION("smooth part is convex along segments") {
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                for (int trial = 0; trial < 50; ++trial) {
                    Vector x = p.set().sample(rng);
                    Vector y = p.set().sample(rng);
                    const double t = unit(rng);
                    const double mid = p.smooth_value(t * x + (1.0 - t) * y);
                    const double chord = t * p.smooth_value(x) + (1.0 - t) * p.smooth_value(y);
                    REQUIRE(mid <= chord + 1e-9 * std::max(1.0, std::abs(chord)));
                }
            }
        }
    }
}

TEST_CASE("generator determinism and descriptor round trip") {
    auto desc = testutil::reference_lasso_descriptor();
    const CompositeProblem a = generate_problem(desc);
    const CompositeProblem b = generate_problem(desc);
    REQUIRE(a.data_matrix() == b.data_matrix());
    REQUIRE(a.data_vector() == b.data_vector());
    REQUIRE(a.lipschitz() == b.lipschitz());

    const std::string text = desc.to_string();
    const ProblemDescriptor back = ProblemDescriptor::parse(text);
    REQUIRE(back.generator == desc.generator);
    REQUIRE(back.seed == desc.seed);
    REQUIRE(back.n == desc.n);
    REQUIRE(back.d == desc.d);
    REQUIRE(back.lambda == desc.lambda);
    REQUIRE(back.box_lower == desc.box_lower);
    REQUIRE(back.box_upper == desc.box_upper);
    REQUIRE(back.to_string() == text);

    ProblemDescriptor bad = desc;
    bad.generator = "unknown";
    REQUIRE_THROWS_AS(generate_problem(bad), std::invalid_argument);
}

TEST_CASE("construction validation") {
    REQUIRE_THROWS_AS(CompositeProblem::least_squares(Matrix::Identity(2, 2), Vector::Zero(3),
                                                      NonsmoothPart::zero(),
                                                      FeasibleSet::full_space(2)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(CompositeProblem::least_squares(Matrix::Identity(2, 2), Vector::Zero(2),
                                                      NonsmoothPart::zero(),
                                                      FeasibleSet::full_space(3)),
                      std::invalid_argument);
    Vector bad_labels(2);
    bad_labels << 1.0, 0.5;
    REQUIRE_THROWS_AS(CompositeProblem::logistic(Matrix::Identity(2, 2), bad_labels,
                                                 NonsmoothPart::zero(),
                                                 FeasibleSet::full_space(2)),
                      std::invalid_argument);
}
