#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hypercube/text.hpp"

using namespace hypercube;

TEST_CASE("normalize_label fixed points") {
    CHECK(normalize_label("rain") == "rain");
    CHECK(normalize_label("melbourne beach") == "melbourne beach");
}

TEST_CASE("normalize_label applies the full rule") {
    CHECK(normalize_label("  Tropical Storm Fay.") == "tropical storm fay");
    CHECK(normalize_label("Melbourne Beach, Fl.") == "melbourne beach, fl");
    CHECK(normalize_label("RAIN\t  gauge") == "rain gauge");
    CHECK(normalize_label("...a..b...") == "a..b");
    CHECK(normalize_label("25.28 inches") == "25.28 inches");
}

TEST_CASE("normalize_label drops strings that normalize to empty") {
    CHECK_FALSE(normalize_label("").has_value());
    CHECK_FALSE(normalize_label("   ").has_value());
    CHECK_FALSE(normalize_label("...!!!,,,").has_value());
}

TEST_CASE("normalization is idempotent on random strings") {
    std::mt19937 rng(7);
    const std::string alphabet = "abcXYZ 019 .,;:!?-'\"\t()  zz";
    for (int trial = 0; trial < 1000; ++trial) {
        size_t len = rng() % 24;
        std::string s;
        for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
        std::string once = normalize_text(s);
        CHECK(normalize_text(once) == once);
    }
}

TEST_CASE("tokenize splits on whitespace and normalizes each token") {
    CHECK(tokenize("How much rainfall did Melbourne Beach, Florida receive?") ==
          std::vector<std::string>{"how", "much", "rainfall", "did", "melbourne", "beach",
                                   "florida", "receive"});
    CHECK(tokenize("25.28 inches") == std::vector<std::string>{"25.28", "inches"});
    CHECK(tokenize("  ...  ") == std::vector<std::string>{});
    CHECK(tokenize("") == std::vector<std::string>{});
}

TEST_CASE("fnv1a64_hex is stable and distinct") {
    CHECK(fnv1a64_hex("abc") == fnv1a64_hex("abc"));
    CHECK(fnv1a64_hex("abc") != fnv1a64_hex("abd"));
    CHECK(fnv1a64_hex("").size() == 16);
}
