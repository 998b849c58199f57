#include <doctest.h>

#include "darkscan/distribution.hpp"
#include "darkscan/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace darkscan;

namespace {

double sum(const CategoryDistribution& d) {
    const auto& p = d.probabilities();
    return std::accumulate(p.begin(), p.end(), 0.0);
}

}  // namespace

TEST_CASE("softmax examples") {
    std::array<double, 8> zeros{};
    auto u = softmax(zeros, 1.0);
    for (double p : u.probabilities()) CHECK(p == doctest::Approx(0.125).epsilon(1e-12));

    std::array<double, 8> first{1, 0, 0, 0, 0, 0, 0, 0};
    CHECK(softmax(first, 1e-3)[Category::ForcedAction] == doctest::Approx(1.0).epsilon(1e-12));

    std::array<double, 8> ln2{std::log(2.0), 0, 0, 0, 0, 0, 0, 0};
    CHECK(softmax(ln2, 1.0)[Category::ForcedAction] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("softmax rejects bad input") {
    std::array<double, 8> s{};
    s[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)softmax(s, 1.0), NonFinite);
    s[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)softmax(s, 1.0), NonFinite);
    std::array<double, 8> ok{};
    CHECK_THROWS_AS((void)softmax(ok, 0.0), InvalidArgument);
    CHECK_THROWS_AS((void)softmax(ok, -1.0), InvalidArgument);
    std::array<double, 7> short_scores{};
    CHECK_THROWS_AS((void)softmax(short_scores, 1.0), InvalidArgument);
}

TEST_CASE("softmax is shift invariant and monotone") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> score(-20, 20);
    std::uniform_real_distribution<double> shift(-500, 500);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 8> s{};
        for (auto& v : s) v = score(rng);
        double T = 0.1 + trial * 0.01;
        auto base = softmax(s, T);
        CHECK(sum(base) == doctest::Approx(1.0).epsilon(1e-12));

        double k = shift(rng);
        auto shifted = s;
        for (auto& v : shifted) v += k;
        auto moved = softmax(shifted, T);
        for (std::size_t i = 0; i < 8; ++i) CHECK(moved.probabilities()[i] == doctest::Approx(base.probabilities()[i]).epsilon(1e-9));

        std::size_t c = static_cast<std::size_t>(trial % 8);
        auto raised = s;
        raised[c] += 0.5;
        const double before = base.probabilities()[c];
        const double after = softmax(raised, T).probabilities()[c];
        CHECK(after >= before);
        if (before < 0.999) CHECK(after > before);
    }
}

TEST_CASE("softmax survives extreme scores") {
    std::array<double, 8> s{1e300, -1e300, 0, 0, 0, 0, 0, 0};
    auto d = softmax(s, 1.0);
    CHECK(d[Category::ForcedAction] == 1.0);
    CHECK(sum(d) == doctest::Approx(1.0));
}

TEST_CASE("argmax tie-break and temperature sweep keep the argmax") {
    CHECK(CategoryDistribution::uniform().argmax() == Category::ForcedAction);
    std::array<double, 8> tied{0, 0.4, 0, 0, 0.4, 0, 0.2, 0};
    CHECK(CategoryDistribution::from_probabilities(tied).argmax() == Category::Misdirection);

    std::array<double, 8> s{0.3, -1.0, 2.5, 0.0, 2.4, -3.0, 1.0, 0.5};
    for (double T : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0})
        CHECK(softmax(s, T).argmax() == Category::NotDarkPattern);
}

TEST_CASE("from_probabilities validates") {
    std::array<double, 8> p{0.5, 0.5, 0, 0, 0, 0, 0, 0};
    CHECK_NOTHROW((void)CategoryDistribution::from_probabilities(p));
    p[2] = 0.01;
    CHECK_THROWS_AS((void)CategoryDistribution::from_probabilities(p), InvalidDistribution);
    std::array<double, 8> neg{1.1, -0.1, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS((void)CategoryDistribution::from_probabilities(neg), InvalidDistribution);
    std::array<double, 8> nan{std::nan(""), 1, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS((void)CategoryDistribution::from_probabilities(nan), InvalidDistribution);
}

TEST_CASE("normalized rescales weights") {
    std::array<double, 8> w{1, 1, 2, 0, 0, 0, 0, 0};
    auto d = CategoryDistribution::normalized(w);
    CHECK(d[Category::NotDarkPattern] == doctest::Approx(0.5));
    CHECK(sum(d) == doctest::Approx(1.0).epsilon(1e-15));
    std::array<double, 8> zero{};
    CHECK_THROWS_AS((void)CategoryDistribution::normalized(zero), InvalidDistribution);
    std::array<double, 8> neg{1, -1, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS((void)CategoryDistribution::normalized(neg), InvalidDistribution);
}
