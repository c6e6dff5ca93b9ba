#include "doctest.h"
#include "helpers.hpp"

#include "opdyn/kernels.hpp"

#include <cmath>

using namespace opdyn;
using namespace testing;

namespace {

const std::vector<KernelShape> kPositiveShapes{
    LinearPositive{0.5},          LinearPositive{1.0},
    ModeratedPositive{0.3, 0.5},  ModeratedPositive{0.1, 1.0},
    BoundedConfidence{0.2, 0.5},  BoundedConfidence{0.25, 1.0},
    RelaxedBoundedConfidence{0.2, 0.5, 0.05},
};

const CombinedPositiveNegative kCombined{0.4, 0.2, 0.5, 0.6, -0.3, 0.9};

} // namespace

TEST_CASE("kernel values from the family definitions") {
    auto rng = Rng::stream(1);
    for (int i = 0; i < 100; ++i) {
        CHECK(kernel_value(LinearPositive{0.5}, rng.uniform(), rng.uniform()) == 0.5);
    }
    CHECK(kernel_value(BoundedConfidence{0.2, 0.5}, 0.1, 0.9) == 0.0);
    CHECK(kernel_value(BoundedConfidence{0.2, 0.5}, 0.1, 0.25) == 0.5);
    CHECK(kernel_value(kCombined, 0.0, 0.95) == 0.0);
    CHECK(kernel_value(kCombined, 0.05, 1.0) == 0.0);
}

TEST_CASE("moderated curve is zero at 0 and 2 d*, peak at d*") {
    const ModeratedPositive k{0.3, 0.5};
    CHECK(kernel_value(k, 0.4, 0.4) == 0.0);
    CHECK(kernel_value(k, 0.2, 0.5) == doctest::Approx(0.5));
    CHECK(kernel_value(k, 0.0, 0.6) == 0.0);
    CHECK(kernel_value(k, 0.0, 0.7) == 0.0);
    // Quadratic: half the peak distance gives 3/4 of the peak gain.
    CHECK(kernel_value(k, 0.0, 0.15) == doctest::Approx(0.375));
    CHECK(kernel_value(k, 0.1, 0.0) == doctest::Approx(kernel_value(k, 0.0, 0.1)));
}

TEST_CASE("combined kernel: sign structure and named peaks") {
    CHECK(kernel_value(kCombined, 0.0, 0.2) == doctest::Approx(0.5));
    CHECK(kernel_value(kCombined, 0.0, 0.6) == doctest::Approx(-0.3));
    CHECK(kernel_value(kCombined, 0.0, 0.4) == 0.0);
    for (int k = 0; k <= 1000; ++k) {
        const double d = k / 1000.0;
        const double l = kernel_value(kCombined, 0.0, d);
        if (d < 0.4) CHECK(l >= 0.0);
        else if (d < 0.9) CHECK(l <= 0.0);
        else CHECK(l == 0.0);
    }
}

TEST_CASE("bounded confidence is closed at epsilon; relaxed variant keeps a residual") {
    CHECK(kernel_value(BoundedConfidence{0.25, 0.5}, 0.25, 0.5) == 0.5);
    CHECK(kernel_value(BoundedConfidence{0.25, 0.5}, 0.25, 0.75) == 0.0);
    const RelaxedBoundedConfidence r{0.2, 0.5, 0.05};
    CHECK(kernel_value(r, 0.0, 0.9) == 0.05);
    CHECK(kernel_value(r, 0.0, 0.1) == 0.5);
}

TEST_CASE("positive families never produce a skip") {
    auto rng = Rng::stream(2);
    for (const auto& shape : kPositiveShapes) {
        REQUIRE(is_positive_family(shape));
        for (int i = 0; i < 2000; ++i) {
            const double xi = rng.uniform();
            const double xs = rng.uniform();
            const double next = xi + kernel_value(shape, xi, xs) * (xs - xi);
            CHECK(next >= std::min(xi, xs));
            CHECK(next <= std::max(xi, xs));
        }
    }
}

TEST_CASE("distance-only kernels are symmetric in their arguments") {
    auto rng = Rng::stream(3);
    const std::vector<KernelShape> shapes{ModeratedPositive{0.3, 0.5}, BoundedConfidence{0.2, 0.5},
                                          RelaxedBoundedConfidence{0.2, 0.5, 0.05}, ModeratedNegative{0.3, -0.5},
                                          kCombined};
    for (const auto& s : shapes) {
        for (int i = 0; i < 500; ++i) {
            const double a = rng.uniform();
            const double b = rng.uniform();
            CHECK(kernel_value(s, a, b) == kernel_value(s, b, a));
            // Same distance elsewhere on the axis.
            const double d = std::abs(a - b);
            CHECK(kernel_value(s, 0.0, d) == doctest::Approx(kernel_value(s, a, b)).epsilon(1e-9));
        }
    }
}

TEST_CASE("mirror negates every curve") {
    auto rng = Rng::stream(4);
    for (const auto& s : kPositiveShapes) {
        const auto m = mirror(s);
        for (int i = 0; i < 200; ++i) {
            const double a = rng.uniform();
            const double b = rng.uniform();
            CHECK(kernel_value(m, a, b) == -kernel_value(s, a, b));
        }
    }
    CHECK(std::holds_alternative<LinearNegative>(mirror(LinearPositive{0.4})));
    CHECK(std::holds_alternative<ModeratedNegative>(mirror(ModeratedPositive{0.3, 0.4})));
    CHECK(kernel_value(mirror(kCombined), 0.0, 0.2) == doctest::Approx(-0.5));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((validate(KernelShape{LinearPositive{0.0}})), ConfigError);
    CHECK_THROWS_AS((validate(KernelShape{LinearPositive{1.5}})), ConfigError);
    CHECK_THROWS_AS((validate(KernelShape{LinearNegative{0.5}})), ConfigError);
    CHECK_THROWS_AS((validate(KernelShape{BoundedConfidence{1.5, 0.5}})), ConfigError);
    CHECK_THROWS_AS((validate(KernelShape{CombinedPositiveNegative{0.4, 0.5, 0.5, 0.6, -0.3, 0.9}})), ConfigError);
    CHECK_THROWS_AS((validate(KernelShape{CombinedPositiveNegative{0.4, 0.2, 0.5, 0.6, -0.3, 1.2}})), ConfigError);
    CHECK_NOTHROW((validate(KernelShape{kCombined})));
    InfluenceKernel k;
    k.prejudice = Prejudice{vec({0.5, 0.5}), vec({0.5, 1.5})};
    CHECK_THROWS_AS(k.validate(2), ConfigError);
    k.prejudice = Prejudice{vec({0.5, 0.5}), vec({0.5, 1.0})};
    CHECK_NOTHROW(k.validate(2));
    CHECK_THROWS_AS(k.validate(3), ConfigError);
}

TEST_CASE("stubborn agents have a zero coefficient") {
    InfluenceKernel k{LinearPositive{0.5}, {true, false}, std::nullopt};
    CHECK(kernel_value(k, 0, 0.1, 0.9) == 0.0);
    CHECK(kernel_value(k, 1, 0.1, 0.9) == 0.5);
}

TEST_CASE("activation probabilities") {
    const InfluenceKernel lin{LinearPositive{0.5}, {}, std::nullopt};
    CHECK(activation_probability(AlwaysActive{}, lin, 0, 0.2, 0.7) == 1.0);
    // The response |l * d| is 0.5 * 0.6 = 0.3; scale 2 gives 0.6.
    CHECK(activation_probability(AbsKernelProportional{2.0}, lin, 0, 0.2, 0.8) == doctest::Approx(0.6));
    // Saturation: 10 * 0.5 * 0.6 = 3 clamps to 1.
    CHECK(activation_probability(AbsKernelProportional{10.0}, lin, 0, 0.2, 0.8) == 1.0);
    CHECK(activation_probability(AbsKernelProportional{2.0}, lin, 0, 0.4, 0.4) == 0.0);
    const ConfidenceWeighted cw{vec({0.25, 1.0}), std::nullopt};
    CHECK(activation_probability(cw, lin, 0, 0.2, 0.8) == doctest::Approx(0.75));
    CHECK(activation_probability(cw, lin, 1, 0.2, 0.8) == 0.0);
    const ConfidenceWeighted cwk{vec({0.5, 0.0}), 2.0};
    CHECK(activation_probability(cwk, lin, 0, 0.2, 0.8) == doctest::Approx(0.3));
    CHECK_THROWS_AS((validate(ActivationModel{AbsKernelProportional{-1.0}})), ConfigError);
    CHECK_THROWS_AS((validate(ActivationModel{ConfidenceWeighted{vec({1.5}), std::nullopt}}, 1)), ConfigError);
}

TEST_CASE("activation stays a probability") {
    auto rng = Rng::stream(5);
    const InfluenceKernel comb{kCombined, {}, std::nullopt};
    for (int i = 0; i < 2000; ++i) {
        const double p = activation_probability(AbsKernelProportional{rng.uniform(0.0, 20.0)}, comb, 0,
                                                rng.uniform(), rng.uniform());
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("Friedkin-Johnsen update") {
    auto rng = Rng::stream(6);
    for (int i = 0; i < 100; ++i) {
        const double xi = rng.uniform();
        const double xs = rng.uniform();
        CHECK(fj_update(LinearPositive{0.7}, xi, xs, 0.3, 0.0) == doctest::Approx(0.3));
        const double plain = xi + 0.7 * (xs - xi);
        CHECK(fj_update(LinearPositive{0.7}, xi, xs, 0.3, 1.0) == doctest::Approx(plain));
    }
    // 0.5 * (0.4 + 0.5 * 0.4) + 0.5 * 0.2
    CHECK(fj_update(LinearPositive{0.5}, 0.4, 0.8, 0.2, 0.5) == doctest::Approx(0.4));
}

TEST_CASE("descriptions name the family") {
    CHECK(describe(KernelShape{LinearPositive{0.3}}) == "linear_positive(gain=0.3)");
    CHECK(describe(ActivationModel{AlwaysActive{}}) == "always");
}
