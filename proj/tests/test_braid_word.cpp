#include <catch_amalgamated.hpp>

#include "braidfloer/braid_word.hpp"
#include "oracles.hpp"

using namespace braidfloer;

TEST_CASE("letters outside the generator range are rejected") {
    CHECK_THROWS_AS(BraidWord::from_signed(3, {3}), BraidError);
    CHECK_THROWS_AS(BraidWord::from_signed(3, {0}), BraidError);
    CHECK_THROWS_AS(BraidWord(0), BraidError);
    CHECK_NOTHROW(BraidWord::from_signed(3, {1, -2, 2}));
}

TEST_CASE("exponent sum counts signed letters") {
    // sigma_4^-1 s3 s1 s3 s2^-1 s1 s2 s3^-1 s4^-1 s1 s2 s3 s4^-1 s1 s2^-1 in B_5
    const auto w = BraidWord::from_signed(5, {-4, 3, 1, 3, -2, 1, 2, -3, -4, 1, 2, 3, -4, 1, -2});
    CHECK(exponent_sum(w) == 3);
    CHECK(exponent_sum(inverse(w)) == -3);
    CHECK(exponent_sum(compose(w, w)) == 6);
}

TEST_CASE("permutation of a word follows the strands") {
    const auto w = BraidWord::from_signed(3, {1, 2});
    const auto p = permutation_of(w);
    // s1 swaps positions 0,1; s2 then swaps 1,2: strand 0 ends at 2
    CHECK(p(0) == 2);
    CHECK(p(1) == 0);
    CHECK(p(2) == 1);
    CHECK(permutation_of(inverse(w)) == p.inverse());
    CHECK(permutation_of(compose(w, inverse(w))).is_identity());
    CHECK(p.then(p.inverse()).is_identity());
}

TEST_CASE("cycles of a permutation") {
    const StrandPermutation p(std::vector<int>{1, 2, 0, 4, 3, 5});
    const auto c = p.cycles();
    REQUIRE(c.size() == 3);
    CHECK(c[0] == std::vector<int>{0, 1, 2});
    CHECK(c[1] == std::vector<int>{3, 4});
    CHECK(c[2] == std::vector<int>{5});
    CHECK_THROWS_AS(StrandPermutation(std::vector<int>{0, 0}), BraidError);
}

TEST_CASE("half twist squared is central and has the reverse permutation") {
    for (int n = 2; n <= 5; ++n) {
        const auto d = half_twist(n);
        CHECK(exponent_sum(d) == n * (n - 1) / 2);
        for (int p = 0; p < n; ++p) CHECK(permutation_of(d)(p) == n - 1 - p);
        const auto full = full_twist(n, 1);
        CHECK(permutation_of(full).is_identity());
        std::mt19937_64 rng(n);
        for (int t = 0; t < 10; ++t) {
            const auto w = oracle::random_word(rng, n, 8);
            CHECK(oracle::equal_in_group(compose(full, w), compose(w, full)));
        }
        CHECK(oracle::equal_in_group(compose(full_twist(n, 2), full_twist(n, -1)), full));
    }
}

TEST_CASE("Artin action oracle sanity: braid relation and non-commutation") {
    const auto a = BraidWord::from_signed(3, {1, 2, 1});
    const auto b = BraidWord::from_signed(3, {2, 1, 2});
    CHECK(oracle::equal_in_group(a, b));
    CHECK_FALSE(oracle::equal_in_group(BraidWord::from_signed(3, {1, 2}), BraidWord::from_signed(3, {2, 1})));
    CHECK(oracle::equal_in_group(BraidWord::from_signed(4, {1, 3}), BraidWord::from_signed(4, {3, 1})));
    CHECK(oracle::equal_in_group(BraidWord::from_signed(3, {1, -1}), BraidWord(3)));
}
