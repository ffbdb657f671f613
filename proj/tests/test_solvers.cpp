#include <doctest.h>

#include <totreg/errors.hpp>
#include <totreg/manifold.hpp>
#include <totreg/regression.hpp>
#include <totreg/rng.hpp>
#include <totreg/solvers.hpp>
#include <totreg/tensor.hpp>
#include <totreg/tucker.hpp>

#include <Eigen/QR>
#include <cmath>
#include <memory>
#include <vector>

using namespace totreg;

namespace {

DenseTensor random_tensor(Rng& rng, const std::vector<Index>& shape) {
    DenseTensor t(shape);
    for (Index f = 0; f < t.size(); ++f) t[f] = rng.normal();
    return t;
}

TuckerTensor random_point(Rng& rng, const std::vector<Index>& shape,
                          const std::vector<Index>& r) {
    TuckerTensor x;
    x.core = random_tensor(rng, r);
    for (size_t k = 0; k < shape.size(); ++k)
        x.factors.push_back(random_orthonormal(rng, shape[k], r[k]));
    return x;
}

// Identity design: n = ambient size, A = I, unit scale, so apply = vec and
// the operator is an exact isometry.
ProblemInstance identity_instance(Rng& rng, const std::vector<Index>& dims) {
    Index q = 1;
    for (Index p : dims) q *= p;
    ProblemInstance inst;
    inst.design.kind = DesignKind::General;
    inst.design.a = Matrix::Identity(q, q);
    inst.design.covariate_shape = dims;
    inst.design.d = static_cast<Index>(dims.size());
    inst.design.m = 0;
    inst.design.scale = 1.0;
    inst.observations = DenseTensor({q}, random_tensor(rng, dims).data());
    return inst;
}

DenseTensor observations_as_tensor(const ProblemInstance& inst,
                                   const std::vector<Index>& dims) {
    return DenseTensor(dims, inst.observations.data());
}

// Perturb the truth and retract back to rank r.
TuckerTensor perturbed_start(Rng& rng, const ProblemInstance& inst,
                             const std::vector<Index>& r, double eps) {
    DenseTensor truth = inst.ground_truth->dense();
    DenseTensor noise = random_tensor(rng, truth.shape());
    noise *= eps * frob_norm(truth) / frob_norm(noise);
    return retract(truth + noise, r, Retraction::STHosvd);
}

double rel_error(const TuckerTensor& x, const TuckerTensor& truth) {
    return frob_norm(x.dense() - truth.dense()) / frob_norm(truth.dense());
}

// Materializes an orthogonal-ish spanning set of the tangent space at x by
// mapping every unit parameter through the parameterization.
std::vector<DenseTensor> tangent_basis(const std::shared_ptr<const Gauge>& g) {
    std::vector<DenseTensor> basis;
    const auto r = g->base.ranks();
    const auto shape = g->base.ambient_shape();
    TangentVector tv;
    tv.gauge = g;
    tv.b = DenseTensor(r);
    for (size_t k = 0; k < shape.size(); ++k)
        tv.d.emplace_back(Matrix::Zero(shape[k] - r[k], r[k]));
    for (Index f = 0; f < tv.b.size(); ++f) {
        tv.b[f] = 1.0;
        basis.push_back(tangent_to_dense(tv));
        tv.b[f] = 0.0;
    }
    for (size_t k = 0; k < shape.size(); ++k)
        for (Index j = 0; j < tv.d[k].size(); ++j) {
            tv.d[k](j % tv.d[k].rows(), j / tv.d[k].rows()) = 1.0;
            basis.push_back(tangent_to_dense(tv));
            tv.d[k](j % tv.d[k].rows(), j / tv.d[k].rows()) = 0.0;
        }
    return basis;
}

} // namespace

TEST_CASE("riemannian gradient: optimum, descent, finite differences") {
    Rng rng(3);
    std::vector<Index> dims{4, 3, 3};
    std::vector<Index> r{2, 2, 2};
    ProblemInstance inst =
        generate_gaussian_instance(dims, 2, 1, r, 0.0, 40, 5);

    // Zero at the noiseless optimum.
    DenseTensor g_opt = riemannian_gradient(inst, *inst.ground_truth);
    CHECK(frob_norm(g_opt) < 1e-9 * frob_norm(inst.observations));

    // Descent direction and finite-difference agreement at random points.
    TuckerTensor x = random_point(rng, dims, r);
    auto gauge = std::make_shared<Gauge>(compute_gauge(x));
    DenseTensor g = riemannian_gradient(inst, *gauge);
    DenseTensor xd = x.dense();
    const double h = 1e-6;
    const double f0m = loss(inst, xd - g * h);
    const double f0p = loss(inst, xd + g * h);
    CHECK(f0m < f0p);
    CHECK((f0p - f0m) / (2.0 * h) > 0.0); // derivative along g positive

    for (int rep = 0; rep < 20; ++rep) {
        TangentVector tv;
        tv.gauge = gauge;
        tv.b = random_tensor(rng, r);
        for (size_t k = 0; k < dims.size(); ++k) {
            Matrix dk(dims[k] - r[k], r[k]);
            for (Index i = 0; i < dk.size(); ++i)
                dk(i % dk.rows(), i / dk.rows()) = rng.normal();
            tv.d.push_back(dk);
        }
        DenseTensor dir = tangent_to_dense(tv);
        dir *= 1.0 / frob_norm(dir);
        const double fd = (loss(inst, xd + dir * h) - loss(inst, xd - dir * h)) /
                          (2.0 * h);
        const double an = inner(g, dir);
        CHECK(fd == doctest::Approx(an).epsilon(1e-5));
    }
}

TEST_CASE("rgd step: unit stepsize under isometry, fixed point, loss decrease") {
    Rng rng(7);
    std::vector<Index> dims{4, 4, 3};
    std::vector<Index> r{2, 2, 2};
    SolverConfig cfg;
    cfg.input_rank = r;

    ProblemInstance iso = identity_instance(rng, dims);
    TuckerTensor x = random_point(rng, dims, r);
    auto [x1, alpha] = rgd_step(iso, x, cfg);
    CHECK(alpha == doctest::Approx(1.0).epsilon(1e-12));

    ProblemInstance inst =
        generate_gaussian_instance(dims, 3, 0, r, 0.0, 200, 11);
    auto [fixed, a0] = rgd_step(inst, *inst.ground_truth, cfg);
    CHECK(a0 == 0.0);
    CHECK(frob_norm(fixed.dense() - inst.ground_truth->dense()) <
          1e-10 * frob_norm(inst.ground_truth->dense()));

    TuckerTensor start = perturbed_start(rng, inst, r, 0.1);
    auto [next, a1] = rgd_step(inst, start, cfg);
    CHECK(a1 > 0.0);
    CHECK(loss(inst, next.dense()) < loss(inst, start.dense()));
}

TEST_CASE("rgd exact line search decreases loss before retraction") {
    Rng rng(11);
    std::vector<Index> dims{4, 4, 3};
    std::vector<Index> r{2, 2, 2};
    for (int rep = 0; rep < 5; ++rep) {
        ProblemInstance inst = generate_gaussian_instance(
            dims, 3, 0, r, 0.01, 150, 20 + static_cast<std::uint64_t>(rep));
        TuckerTensor x = random_point(rng, dims, r);
        DenseTensor g = riemannian_gradient(inst, x);
        const double alpha =
            std::pow(frob_norm(g), 2.0) /
            std::pow(frob_norm(apply(inst.design, g)), 2.0);
        CHECK(loss(inst, x.dense() - g * alpha) <=
              loss(inst, x.dense()) + 1e-12);
    }
}

TEST_CASE("rgn step: fixed point and identity-design collapse") {
    Rng rng(13);
    std::vector<Index> dims{4, 4, 3};
    std::vector<Index> r{2, 2, 2};
    SolverConfig cfg;
    cfg.input_rank = r;

    ProblemInstance inst =
        generate_gaussian_instance(dims, 3, 0, r, 0.0, 200, 31);
    TuckerTensor out = rgn_step(inst, *inst.ground_truth, cfg);
    CHECK(frob_norm(out.dense() - inst.ground_truth->dense()) <
          1e-9 * frob_norm(inst.ground_truth->dense()));

    // Identity operator: the half step is the tangent projection of Y.
    ProblemInstance iso = identity_instance(rng, dims);
    TuckerTensor x = random_point(rng, dims, r);
    Gauge g = compute_gauge(x);
    DenseTensor half =
        project_tangent(g, observations_as_tensor(iso, dims));
    TuckerTensor expect = retract(half, r, cfg.retraction);
    TuckerTensor got = rgn_step(iso, x, cfg);
    CHECK(frob_norm(got.dense() - expect.dense()) <
          1e-8 * std::max(1.0, frob_norm(expect.dense())));
}

TEST_CASE("rgn step matches the explicit tangent-basis least squares") {
    std::vector<Index> dims{4, 4};
    std::vector<Index> r{2, 2};
    SolverConfig cfg;
    cfg.input_rank = r;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        ProblemInstance inst =
            generate_gaussian_instance(dims, 2, 0, r, 0.01, 60, seed);
        TuckerTensor x = random_point(rng, dims, r);
        auto gauge = std::make_shared<Gauge>(compute_gauge(x));

        auto basis = tangent_basis(gauge);
        const Index nb = static_cast<Index>(basis.size());
        DenseTensor res0 = apply(inst.design, x.dense());
        Matrix ls(inst.observations.size(), nb);
        for (Index j = 0; j < nb; ++j)
            ls.col(j) = apply(inst.design, basis[static_cast<size_t>(j)]).data();
        Vector rhs = inst.observations.data() - res0.data();
        Vector coef = ls.colPivHouseholderQr().solve(rhs);
        DenseTensor half = x.dense();
        for (Index j = 0; j < nb; ++j)
            half += basis[static_cast<size_t>(j)] * coef(j);

        TuckerTensor expect = retract(half, r, cfg.retraction);
        TuckerTensor got = rgn_step(inst, x, cfg);
        CHECK(frob_norm(got.dense() - expect.dense()) <
              1e-8 * std::max(1.0, frob_norm(expect.dense())));

        // Gauss-Newton optimality: no random tangent candidate beats the
        // least-squares residual.
        const double best = 0.5 * (ls * coef - rhs).squaredNorm();
        for (int cand = 0; cand < 100; ++cand) {
            Vector c(nb);
            for (Index j = 0; j < nb; ++j) c(j) = rng.normal();
            const double val = 0.5 * (ls * c - rhs).squaredNorm();
            CHECK(val >= best - 1e-10);
        }
    }
}

TEST_CASE("vector closed form agrees with the general Gauss-Newton step") {
    Rng rng(17);
    std::vector<Index> dims{5, 4, 4};
    std::vector<Index> r{2, 2, 2};
    SolverConfig cfg;
    cfg.input_rank = r;

    ProblemInstance inst = generate_gaussian_instance(
        dims, 1, 2, r, 0.01, 12, 3, DesignKind::Vector);
    TuckerTensor x = random_point(rng, dims, r);
    TuckerTensor closed = rgn_step_vector_closed_form(inst, x, cfg);
    TuckerTensor general = rgn_step(inst, x, cfg);
    CHECK(frob_norm(closed.dense() - general.dense()) <
          1e-8 * std::max(1.0, frob_norm(general.dense())));

    // Fixed point at the noiseless truth.
    ProblemInstance clean = generate_gaussian_instance(
        dims, 1, 2, r, 0.0, 12, 5, DesignKind::Vector);
    TuckerTensor out = rgn_step_vector_closed_form(clean, *clean.ground_truth, cfg);
    CHECK(frob_norm(out.dense() - clean.ground_truth->dense()) <
          1e-8 * frob_norm(clean.ground_truth->dense()));

    // A = identity: agreement again (Gram collapse).
    ProblemInstance eye = clean;
    eye.design.a = Matrix::Identity(5, 5);
    eye.design.scale = 1.0;
    eye.observations = apply(eye.design, clean.ground_truth->dense());
    TuckerTensor c2 = rgn_step_vector_closed_form(eye, x, cfg);
    TuckerTensor g2 = rgn_step(eye, x, cfg);
    CHECK(frob_norm(c2.dense() - g2.dense()) <
          1e-8 * std::max(1.0, frob_norm(g2.dense())));

    // n < p_1 violates the invertibility precondition.
    ProblemInstance thin = generate_gaussian_instance(
        dims, 1, 2, r, 0.0, 3, 7, DesignKind::Vector);
    CHECK_THROWS_AS(rgn_step_vector_closed_form(thin, x, cfg),
                    DegenerateDesignError);
}

TEST_CASE("baseline steps: zero stepsize, identity composition") {
    Rng rng(19);
    std::vector<Index> dims{4, 4, 3};
    std::vector<Index> r{2, 2, 2};
    SolverConfig cfg;
    cfg.input_rank = r;

    ProblemInstance inst =
        generate_gaussian_instance(dims, 3, 0, r, 0.0, 100, 41);
    TuckerTensor x = random_point(rng, dims, r);
    TuckerTensor same = pgd_step(inst, x, 0.0, cfg);
    CHECK(frob_norm(same.dense() - x.dense()) < 1e-10 * frob_norm(x.dense()));

    // PGD with identity operator and unit stepsize jumps to retract(Y).
    ProblemInstance iso = identity_instance(rng, dims);
    TuckerTensor jump = pgd_step(iso, x, 1.0, cfg);
    TuckerTensor expect =
        retract(observations_as_tensor(iso, dims), r, cfg.retraction);
    CHECK(frob_norm(jump.dense() - expect.dense()) <
          1e-9 * std::max(1.0, frob_norm(expect.dense())));

    FactoredState s{x.core, x.factors};
    FactoredState s0 = factored_gd_step(inst, s, 0.0);
    CHECK(frob_norm(s0.dense() - s.dense()) < 1e-12 * frob_norm(s.dense()));
    FactoredState s1 = factored_gd_step(inst, s, 0.01);
    CHECK(loss(inst, s1.dense()) < loss(inst, s.dense()));
}

TEST_CASE("solve: Gauss-Newton and gradient descent converge on clean data") {
    Rng rng(23);
    std::vector<Index> dims{8, 8, 8};
    std::vector<Index> r{2, 2, 2};
    ProblemInstance inst =
        generate_gaussian_instance(dims, 3, 0, r, 0.0, 600, 51);
    TuckerTensor x0 = perturbed_start(rng, inst, r, 0.05);

    SolverConfig cfg;
    cfg.input_rank = r;
    cfg.tol_rel_rmse = 1e-12;

    cfg.algorithm = Algorithm::Rgn;
    auto [xn, tn] = solve(inst, cfg, x0);
    CHECK(tn.reason == Termination::TolReached);
    CHECK(static_cast<int>(tn.records.size()) <= 11);
    CHECK(rel_error(xn, *inst.ground_truth) < 1e-10);

    // Quadratic-style contraction: log-errors at least double while above
    // the floor.
    for (size_t i = 1; i + 1 < tn.records.size(); ++i) {
        const double e0 = tn.records[i].rel_rmse;
        const double e1 = tn.records[i + 1].rel_rmse;
        if (e0 < 1e-3 && e1 > 1e-12)
            CHECK(std::log10(e1) <= 1.8 * std::log10(e0));
    }

    cfg.algorithm = Algorithm::Rgd;
    cfg.max_iters = 300;
    auto [xg, tg] = solve(inst, cfg, x0);
    CHECK(rel_error(xg, *inst.ground_truth) < 1e-8);
    for (size_t i = 4; i + 1 < tg.records.size(); ++i) {
        const double e0 = tg.records[i].rel_rmse;
        const double e1 = tg.records[i + 1].rel_rmse;
        if (e0 > 1e-12) CHECK(e1 <= 0.95 * e0 + 1e-13);
    }
}

TEST_CASE("solve never crashes across the whole input-rank range") {
    Rng rng(29);
    std::vector<Index> dims{4, 4, 4};
    ProblemInstance inst =
        generate_gaussian_instance(dims, 3, 0, {2, 2, 2}, 0.0, 120, 61);
    for (auto r : {std::vector<Index>{1, 1, 1}, {2, 2, 2}, {3, 3, 3},
                   {4, 4, 4}, {1, 3, 2}, {4, 1, 1}}) {
        SolverConfig cfg;
        cfg.input_rank = r;
        cfg.max_iters = 15;
        TuckerTensor x0 =
            retract(adjoint(inst.design, inst.observations), r,
                    Retraction::STHosvd);
        for (auto alg : {Algorithm::Rgd, Algorithm::Rgn, Algorithm::Pgd,
                         Algorithm::FactoredGd}) {
            cfg.algorithm = alg;
            std::pair<TuckerTensor, RunTrace> out;
            CHECK_NOTHROW(out = solve(inst, cfg, x0));
            CHECK(!out.second.records.empty());
            for (const auto& rec : out.second.records)
                CHECK(std::isfinite(rec.loss));
        }
    }
}

TEST_CASE("baseline divergence is flagged, not thrown") {
    Rng rng(31);
    std::vector<Index> dims{4, 4};
    std::vector<Index> r{2, 2};
    ProblemInstance inst =
        generate_gaussian_instance(dims, 2, 0, r, 0.0, 60, 71);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::FactoredGd;
    cfg.input_rank = r;
    cfg.baseline_stepsizes = {1e8};
    cfg.max_iters = 50;
    TuckerTensor x0 = random_point(rng, dims, r);
    auto [x, trace] = solve(inst, cfg, x0);
    CHECK(trace.diverged);
    CHECK(trace.reason == Termination::NumericalFailure);
}

TEST_CASE("solve trace bookkeeping") {
    Rng rng(37);
    std::vector<Index> dims{4, 4, 3};
    std::vector<Index> r{2, 2, 2};
    ProblemInstance inst =
        generate_gaussian_instance(dims, 3, 0, r, 0.1, 100, 81);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::Rgd;
    cfg.input_rank = r;
    cfg.max_iters = 10;
    cfg.tol_rel_rmse = 0.0;
    TuckerTensor x0 = random_point(rng, dims, r);
    auto [x, trace] = solve(inst, cfg, x0);
    CHECK(trace.reason == Termination::MaxIters);
    REQUIRE(trace.records.size() == 11); // initial point + 10 iterations
    for (size_t i = 0; i < trace.records.size(); ++i) {
        CHECK(trace.records[i].iter == static_cast<int>(i));
        CHECK(std::isfinite(trace.records[i].loss));
        if (i > 0)
            CHECK(trace.records[i].elapsed_ns >= trace.records[i - 1].elapsed_ns);
    }

    // Without ground truth rel_rmse is NaN and stopping uses loss change.
    ProblemInstance blind = inst;
    blind.ground_truth.reset();
    cfg.tol_rel_rmse = 1e-13;
    cfg.max_iters = 300;
    auto [xb, tb] = solve(blind, cfg, x0);
    CHECK(std::isnan(tb.records[0].rel_rmse));
    CHECK(std::isfinite(tb.records.back().loss));
}
