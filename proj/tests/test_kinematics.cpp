#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "senc/kinematics.hpp"

using namespace senc;

namespace {

const PlatformGeometry kGeom = PlatformGeometry::default_geometry();

Pose random_workspace_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

std::array<double, 6> as_array(const Pose& p) { return {p.x, p.y, p.z, p.roll, p.pitch, p.yaw}; }

}  // namespace

TEST_CASE("inverse kinematics at the nominal pose") {
    const LegLengths l = inverse_kinematics(kGeom, Pose::identity());
    const auto ref = oracle::leg_lengths({0, 0, 0, 0, 0, 0});
    for (int i = 0; i < 6; ++i) CHECK(std::abs(l[i] - ref[i]) < 1e-9);
    // frozen from the norm oracle
    CHECK(std::abs(l[0] - 43.946269466247) < 1e-9);
    CHECK(std::abs(l[1] - 43.943630937828) < 1e-9);
    CHECK(std::abs(l[2] - 43.949723548619) < 1e-9);

    CHECK(std::abs(l[0] - l[5]) < 1e-9);
    CHECK(std::abs(l[1] - l[4]) < 1e-9);
    CHECK(std::abs(l[2] - l[3]) < 1e-9);
}

TEST_CASE("inverse kinematics with the helmet raised 10 mm") {
    const LegLengths l = inverse_kinematics(kGeom, {0, 0, 10, 0, 0, 0});
    const auto ref = oracle::leg_lengths({0, 0, 10, 0, 0, 0});
    for (int i = 0; i < 6; ++i) CHECK(std::abs(l[i] - ref[i]) < 1e-9);
    CHECK(std::abs(l[0] - 37.40420564589) < 1e-9);
}

TEST_CASE("inverse kinematics matches the oracle across the workspace") {
    std::mt19937_64 rng(21);
    for (int n = 0; n < 200; ++n) {
        const Pose p = random_workspace_pose(rng);
        const auto ref = oracle::leg_lengths(as_array(p));
        const LegLengths l = inverse_kinematics(kGeom, p);
        for (int i = 0; i < 6; ++i) CHECK(std::abs(l[i] - ref[i]) < 1e-9);
    }
}

TEST_CASE("degenerate leg is rejected") {
    PlatformGeometry g = kGeom;
    g.helmet_points[2] = g.base_points[2];
    CHECK_THROWS_AS(inverse_kinematics(g, Pose::identity()), DegenerateLeg);
}

TEST_CASE("inverse Jacobian") {
    SUBCASE("translation columns are the unit leg vectors") {
        const Matrix6 j = inverse_jacobian(kGeom, Pose::identity());
        const auto len = oracle::leg_lengths({0, 0, 0, 0, 0, 0});
        for (int i = 0; i < 6; ++i) {
            for (int k = 0; k < 3; ++k) {
                const double u = (oracle::kHelmet[i][k] - oracle::kBase[i][k]) / len[i];
                CHECK(std::abs(j(i, k) - u) < 1e-12);
            }
        }
    }

    SUBCASE("z column is the projection of the leg direction on z") {
        const Matrix6 j = inverse_jacobian(kGeom, Pose::identity());
        const auto len = oracle::leg_lengths({0, 0, 0, 0, 0, 0});
        for (int i = 0; i < 6; ++i) CHECK(std::abs(j(i, 2) - (42.06 - 73.67) / len[i]) < 1e-12);
    }

    SUBCASE("agrees with central differences of the IK oracle") {
        std::mt19937_64 rng(22);
        for (int n = 0; n < 100; ++n) {
            const Pose p = random_workspace_pose(rng);
            const Matrix6 j = inverse_jacobian(kGeom, p);
            const auto fd = oracle::fd_jacobian(as_array(p), 1e-5);
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) CHECK(std::abs(j(r, c) - fd[r][c]) < 1e-5);
        }
    }

    SUBCASE("library finite-difference fallback agrees with the analytic form") {
        std::mt19937_64 rng(23);
        for (int n = 0; n < 20; ++n) {
            const Pose p = random_workspace_pose(rng);
            CHECK((inverse_jacobian(kGeom, p) - finite_difference_jacobian(kGeom, p, 1e-4)).cwiseAbs().maxCoeff() <
                  1e-6);
        }
    }

    SUBCASE("singular geometry is reported") {
        PlatformGeometry g = kGeom;
        // all legs parallel: rotations about the common direction are unobservable
        for (int i = 0; i < 6; ++i) g.helmet_points[i] = g.base_points[i] - Vec3(0, 0, 30);
        CHECK_THROWS_AS(inverse_jacobian(g, Pose::identity()), SingularConfiguration);
    }
}

TEST_CASE("pseudo-inverse") {
    std::mt19937_64 rng(24);
    const Matrix6 j = inverse_jacobian(kGeom, random_workspace_pose(rng));
    CHECK((pseudo_inverse(j, 0.0) * j - Matrix6::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    // damping shrinks the step
    const Vector6 e = Vector6::Ones();
    CHECK((pseudo_inverse(j, 1.0) * e).norm() < (pseudo_inverse(j, 0.0) * e).norm());
}

TEST_CASE("forward kinematics") {
    SUBCASE("fixed point at the nominal pose") {
        const auto r = forward_kinematics(kGeom, inverse_kinematics(kGeom, Pose::identity()), Pose::identity());
        CHECK(r.converged);
        CHECK(r.iterations == 1);
        CHECK(r.residual < 0.01);
        CHECK(r.pose == Pose::identity());
    }

    SUBCASE("recovers random workspace poses or an exact alternate assembly") {
        std::mt19937_64 rng(25);
        int alternates = 0;
        for (int n = 0; n < 500; ++n) {
            const Pose p = random_workspace_pose(rng);
            const auto measured = oracle::leg_lengths(as_array(p));
            const auto r = forward_kinematics(kGeom, LegLengths{measured}, Pose::identity());
            REQUIRE(r.converged);
            CHECK(r.residual < 0.01);
            double rot = 0.0;
            for (int i = 3; i < 6; ++i) rot = std::max(rot, std::abs(r.pose[i] - p[i]));
            const double trans = (r.pose.translation() - p.translation()).norm();
            if (trans < 1e-3 && rot < 1e-3) continue;
            // lengths alone cannot separate two poses that share them
            ++alternates;
            const auto found = oracle::leg_lengths(as_array(r.pose));
            for (int i = 0; i < 6; ++i) CHECK(std::abs(found[i] - measured[i]) < 1e-6);
            CHECK(trans + rot > 0.01);
        }
        CHECK(alternates <= 10);
    }

    SUBCASE("iteration counts stay near the textbook Newton rate") {
        std::mt19937_64 rng(26);
        std::vector<int> its;
        for (int n = 0; n < 200; ++n) {
            const Pose p = random_workspace_pose(rng);
            its.push_back(forward_kinematics(kGeom, inverse_kinematics(kGeom, p), Pose::identity()).iterations);
        }
        std::nth_element(its.begin(), its.begin() + 100, its.end());
        CHECK(its[100] <= 5);
    }

    SUBCASE("seeding from a nearby pose converges faster") {
        const Pose p{2, -1, 3, 4, -2, 1};
        const Pose near{2.1, -1, 3, 4, -2, 1.1};
        const auto l = inverse_kinematics(kGeom, p);
        CHECK(forward_kinematics(kGeom, l, near).iterations <= forward_kinematics(kGeom, l, Pose::identity()).iterations);
    }

    SUBCASE("without refinement the residual threshold alone decides") {
        SolverConfig cfg;
        cfg.refine_steps = 0;
        const auto r = forward_kinematics(kGeom, inverse_kinematics(kGeom, {4, 4, 4, 4, 4, 4}), Pose::identity(), cfg);
        CHECK(r.converged);
        CHECK(r.residual < cfg.length_tolerance);
        SolverConfig fine;
        const auto f = forward_kinematics(kGeom, inverse_kinematics(kGeom, {4, 4, 4, 4, 4, 4}), Pose::identity(), fine);
        CHECK(f.residual <= r.residual);
        CHECK(f.iterations >= r.iterations);
    }

    SUBCASE("finite-difference Jacobian and damping still converge") {
        SolverConfig cfg;
        cfg.jacobian = JacobianMethod::FiniteDifference;
        const Pose p{3, -4, 5, 6, -7, 8};
        auto r = forward_kinematics(kGeom, inverse_kinematics(kGeom, p), Pose::identity(), cfg);
        CHECK(r.converged);
        cfg = SolverConfig{};
        cfg.damping = 0.05;
        r = forward_kinematics(kGeom, inverse_kinematics(kGeom, p), Pose::identity(), cfg);
        CHECK(r.converged);
        CHECK((r.pose.translation() - p.translation()).norm() < 0.02);
    }

    SUBCASE("infeasible lengths never report success") {
        LegLengths l = inverse_kinematics(kGeom, Pose::identity());
        l[0] += 100.0;
        bool flagged = false;
        try {
            const auto r = forward_kinematics(kGeom, l, Pose::identity());
            flagged = !r.converged && r.residual >= 0.01;
            CHECK_THROWS_AS(require_converged(r), NoConvergence);
        } catch (const SingularConfiguration&) {
            flagged = true;
        }
        CHECK(flagged);
    }

    SUBCASE("iteration limit returns the best pose unconverged") {
        SolverConfig cfg;
        cfg.max_iterations = 1;
        const auto r = forward_kinematics(kGeom, inverse_kinematics(kGeom, {5, 5, 5, 5, 5, 5}), Pose::identity(), cfg);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 1);
        CHECK_THROWS_AS(require_converged(r), NoConvergence);
        CHECK(r.residual >= cfg.length_tolerance);
    }

    SUBCASE("bad solver configuration") {
        SolverConfig cfg;
        cfg.length_tolerance = 0.0;
        CHECK_THROWS_AS(forward_kinematics(kGeom, inverse_kinematics(kGeom, {}), {}, cfg), ConfigError);
        cfg = {};
        cfg.max_iterations = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.damping = -1.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.refine_steps = -1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }

    SUBCASE("deterministic") {
        const LegLengths l = inverse_kinematics(kGeom, {1.25, -3.5, 2.0, 4.0, -6.0, 9.5});
        const auto a = forward_kinematics(kGeom, l, Pose::identity());
        const auto b = forward_kinematics(kGeom, l, Pose::identity());
        CHECK(a.pose == b.pose);
        CHECK(a.residual == b.residual);
    }
}
