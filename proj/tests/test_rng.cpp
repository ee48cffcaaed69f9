#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "ceplan/rng.hpp"

#include "support/chi_square.hpp"

using namespace ceplan;

TEST_CASE("mix64 matches the published splitmix64 sequence") {
    // First three outputs of splitmix64 from state 0; mix64 folds the
    // increment and the finalizer into one call, so mix64(k * gamma) walks
    // the same sequence.
    const std::uint64_t gamma = 0x9e3779b97f4a7c15ull;
    CHECK(mix64(0) == 0xe220a8397b1dcdafull);
    CHECK(mix64(gamma) == 0x6e789e6aa1b965f4ull);
    CHECK(mix64(2 * gamma) == 0x06c45d188009454full);
}

TEST_CASE("mix64 is injective on a sample and fixes no obvious point") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 4096; ++i) seen.insert(mix64(i));
    CHECK(seen.size() == 4096);
    CHECK(mix64(0) != 0);
}

TEST_CASE("derive_stream separates indices and nests domains") {
    std::set<std::uint64_t> streams;
    for (std::uint64_t k = 0; k < 1000; ++k) streams.insert(derive_stream(42, k));
    CHECK(streams.size() == 1000);

    CHECK(derive_stream(42, 1, 5) == derive_stream(derive_stream(42, 1), 5));
    CHECK(derive_stream(42, 1, 5) != derive_stream(42, 2, 5));
    CHECK(derive_stream(42, 1, 5) != derive_stream(42, 1, 6));
}

TEST_CASE("Rng is deterministic per seed and differs across seeds") {
    Rng a(7), b(7), c(8);
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_differ = any_differ || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("Rng output regression pin") {
    // Frozen once from this implementation; a change here means every
    // seeded artifact in the repo changes too.
    Rng rng(1);
    CHECK(rng.next_u64() == 12966619160104079557ull);
    CHECK(rng.next_u64() == 9600361134598540522ull);
    CHECK(rng.next_u64() == 10590380919521690900ull);
}

TEST_CASE("uniform_double stays in [0,1) and fills the range") {
    Rng rng(123);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int rejects nonpositive bounds and respects the range") {
    Rng rng(5);
    CHECK_THROWS_AS(rng.uniform_int(0), std::invalid_argument);
    CHECK_THROWS_AS(rng.uniform_int(-3), std::invalid_argument);
    for (int n : {1, 2, 3, 10, 1000}) {
        for (int i = 0; i < 1000; ++i) {
            const int v = rng.uniform_int(n);
            CHECK(v >= 0);
            CHECK(v < n);
        }
    }
}

TEST_CASE("uniform_int is uniform at the 1% chi-square level") {
    Rng rng(2024);
    const int n = 7;
    const long long draws = 100000;
    std::vector<long long> counts(n, 0);
    for (long long i = 0; i < draws; ++i) ++counts[rng.uniform_int(n)];
    const std::vector<double> probs(n, 1.0 / n);
    const double stat = testsupport::chi_square_stat(counts, probs, draws);
    CHECK(stat < testsupport::chi_square_critical_1pct(n - 1));
}

TEST_CASE("sample_weights honors point masses and zero weights") {
    Rng rng(9);
    const std::vector<double> point{0.0, 1.0, 0.0};
    for (int i = 0; i < 200; ++i) CHECK(rng.sample_weights(point, 1.0) == 1);

    const std::vector<double> gap{0.5, 0.0, 0.5};
    for (int i = 0; i < 2000; ++i) CHECK(rng.sample_weights(gap, 1.0) != 1);
}

TEST_CASE("sample_weights matches its weights at the 1% chi-square level") {
    Rng rng(31337);
    const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
    const long long draws = 100000;
    std::vector<long long> counts(w.size(), 0);
    for (long long i = 0; i < draws; ++i) ++counts[rng.sample_weights(w, 10.0)];
    const std::vector<double> probs{0.1, 0.2, 0.3, 0.4};
    const double stat = testsupport::chi_square_stat(counts, probs, draws);
    CHECK(stat < testsupport::chi_square_critical_1pct(3));
}

TEST_CASE("sample_row with unnormalized tail never escapes the support") {
    // The cumulative walk falls through to the last index only by rounding;
    // with an exact total this is unreachable, with a short total the last
    // index absorbs the remainder.
    Rng rng(77);
    const std::vector<double> w{0.25, 0.25};
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.sample_weights(w, 1.0);
        CHECK(v >= 0);
        CHECK(v <= 1);
    }
}
