#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "vmt/errors.hpp"
#include "vmt/model.hpp"

using namespace vmt;

namespace {

VibronicSystem bare_atom(double gamma_ueV, double gamma_pd_ueV, double omega_over_gamma) {
    VibronicSystem s;
    s.emitter.gamma_ueV = gamma_ueV;
    s.emitter.gamma_pd_ueV = gamma_pd_ueV;
    s.drive = DriveConfig::from_ueV(omega_over_gamma * gamma_ueV);
    return s;
}

VibronicSystem dbt_like() {
    VibronicSystem s;
    s.emitter.gamma_ueV = 0.094;
    s.drive = DriveConfig::from_ueV(0.94);
    s.modes = {
        {22.01, 4.17, 0.129}, {28.98, 6.06, 0.156}, {35.67, 2.83, 0.035},
        {35.93, 10.78, 0.037}, {49.98, 6.00, 0.054}, {56.95, 7.25, 0.060},
        {83.13, 9.33, 0.016}, {94.89, 6.37, 0.028}, {95.28, 7.00, 0.033},
        {97.27, 10.91, 0.060},
    };
    return s;
}

} // namespace

TEST_CASE("huang_rhys") {
    CHECK(huang_rhys({5.0, 0.0, 0.1}) == 0.0);
    CHECK(huang_rhys({5.0, 5.0 / 3.0, 0.2}) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    // Table row j=4
    CHECK(huang_rhys({35.93, 10.78, 0.037}) == doctest::Approx(0.0900).epsilon(1.2e-3));
    CHECK(std::abs(huang_rhys({35.93, 10.78, 0.037}) - 0.0900167) < 1e-6);
}

TEST_CASE("derive: bare atom") {
    const auto dq = derive(bare_atom(4.1, 0.0, 10.0));
    CHECK(dq.beta_tilde == 0.0);
    CHECK(dq.fc_factor == 1.0);
    CHECK(dq.omega_renorm_meV == doctest::Approx(0.041).epsilon(1e-14));
    REQUIRE(dq.has_splitting());
    // sqrt((10g)^2 - (g/4)^2) = 9.996874...g
    CHECK(*dq.mollow_splitting_meV ==
          doctest::Approx(0.0041 * std::sqrt(100.0 - 1.0 / 16.0)).epsilon(1e-12));
    CHECK(dq.saturation_s == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(dq.ratio_a == 1.0);
}

TEST_CASE("derive: maximum splitting at gamma_pd = gamma/2") {
    const auto dq = derive(bare_atom(4.0, 2.0, 3.0));
    REQUIRE(dq.has_splitting());
    CHECK(*dq.mollow_splitting_meV == doctest::Approx(dq.omega_renorm_meV).epsilon(1e-14));
}

TEST_CASE("derive: DBT sums") {
    const auto dq = derive(dbt_like());
    CHECK(dq.beta_tilde == doctest::Approx(0.2416317).epsilon(2e-6));
    CHECK(dq.fc_factor == doctest::Approx(0.886197).epsilon(2e-6));
    CHECK(dq.polaron_shift_meV > 0.0);
}

TEST_CASE("derive: no-splitting state is reported, not thrown") {
    const auto dq = derive(bare_atom(4.0, 0.0, 0.1));  // omega = 0.1 g < g/4
    CHECK(!dq.has_splitting());
    CHECK(dq.lambda_plus == std::complex<double>(0.0, 0.0));
}

TEST_CASE("lambda sum rule across a random parameter sweep") {
    std::mt19937 rng(20250810);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        VibronicSystem s;
        s.emitter.gamma_ueV = 0.05 + 20.0 * u(rng);
        s.emitter.gamma_pd_ueV = 40.0 * u(rng);
        const double gap = std::abs(s.emitter.gamma_ueV / 4.0 - s.emitter.gamma_pd_ueV / 2.0);
        s.drive = DriveConfig::from_ueV(gap * (1.01 + 50.0 * u(rng)) + 0.01);
        const auto dq = derive(s);
        if (!dq.has_splitting()) continue;
        const auto sum = dq.lambda_plus + dq.lambda_minus;
        CHECK(std::abs(sum - std::complex<double>(0.25, 0.0)) < 0.25 * 1e-12);
    }
}

TEST_CASE("fc_factor monotone in each coupling and consistent with the sum") {
    auto s = dbt_like();
    const auto base = derive(s);
    double sum = 0.0;
    for (const auto& m : s.modes) sum += huang_rhys(m);
    CHECK(base.fc_factor == doctest::Approx(std::exp(-sum / 2.0)).epsilon(1e-15));
    for (std::size_t j = 0; j < s.modes.size(); ++j) {
        auto bumped = s;
        bumped.modes[j].eta_meV *= 1.1;
        CHECK(derive(bumped).fc_factor < base.fc_factor);
    }
}

TEST_CASE("splitting never exceeds the renormalized drive") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        VibronicSystem s = bare_atom(0.1 + 10.0 * u(rng), 10.0 * u(rng), 0.3 + 30.0 * u(rng));
        const auto dq = derive(s);
        if (!dq.has_splitting()) continue;
        CHECK(*dq.mollow_splitting_meV <= dq.omega_renorm_meV * (1.0 + 1e-14));
    }
}

TEST_CASE("derive is deterministic") {
    const auto a = derive(dbt_like());
    const auto b = derive(dbt_like());
    CHECK(a.beta_tilde == b.beta_tilde);
    CHECK(a.fc_factor == b.fc_factor);
    CHECK(a.omega_renorm_meV == b.omega_renorm_meV);
    CHECK(a.lambda_plus == b.lambda_plus);
    CHECK(*a.mollow_splitting_meV == *b.mollow_splitting_meV);
}

TEST_CASE("thermal occupation") {
    CHECK(thermal_occupation(22.01, 0.0) == 0.0);
    CHECK(thermal_occupation(22.01, 10.0) == doctest::Approx(8.05e-12).epsilon(1e-2));
    // classical limit N nu/(kT) -> 1
    const double nu = 5.0, T = 1e6;
    const double n = thermal_occupation(nu, T);
    CHECK(n * nu / (constants::kB_meV_per_K * T) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(thermal_occupation(-1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(thermal_occupation(5.0, -2.0), ValidationError);
}

TEST_CASE("validation rejects bad parameters") {
    VibronicSystem s = bare_atom(4.1, 0.0, 10.0);
    s.emitter.gamma_ueV = 0.0;
    CHECK_THROWS_AS(derive(s), ValidationError);
    s = bare_atom(4.1, -1.0, 10.0);
    CHECK_THROWS_AS(derive(s), ValidationError);
    s = bare_atom(4.1, 0.0, 10.0);
    s.modes.push_back({-5.0, 1.0, 0.1});
    CHECK_THROWS_AS(derive(s), ValidationError);
    s = bare_atom(4.1, 0.0, 10.0);
    s.temperature_K = -1.0;
    CHECK_THROWS_AS(derive(s), ValidationError);
    s = bare_atom(4.1, 0.0, -10.0);
    CHECK_THROWS_AS(derive(s), ValidationError);
}
