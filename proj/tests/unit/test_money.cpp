#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "synthweaver/money.hpp"
#include "synthweaver/oracle.hpp"
#include "test_support.hpp"

namespace synthweaver {
namespace {

using boost::multiprecision::cpp_int;

TEST(Money, ParseAndRender) {
  EXPECT_EQ(Money::parse("12").pico(), 12'000'000'000'000);
  EXPECT_EQ(Money::parse("0.000002").pico(), 2'000'000);
  EXPECT_EQ(Money::parse("-1.5").to_string(), "-1.5");
  EXPECT_EQ(Money::parse("0.130").to_string(), "0.13");
  EXPECT_EQ(Money::parse(".5").to_string(), "0.5");
  EXPECT_EQ(Money().to_string(), "0");
  EXPECT_EQ(Money::from_pico(1).to_string(), "0.000000000001");
}

TEST(Money, RejectsBadInput) {
  EXPECT_THROW(Money::parse(""), std::invalid_argument);
  EXPECT_THROW(Money::parse("1.0000000000001"), std::invalid_argument);
  EXPECT_THROW(Money::parse("1e-5"), std::invalid_argument);
  EXPECT_THROW(Money::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Money::parse("."), std::invalid_argument);
  EXPECT_THROW(Money::parse("99999999999"), std::overflow_error);
}

TEST(Money, RenderParseRoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const auto pico = static_cast<std::int64_t>(rng.below(4'000'000'000'000'000'000ULL)) - 2'000'000'000'000'000'000LL;
    const Money m = Money::from_pico(pico);
    ASSERT_EQ(Money::parse(m.to_string()), m) << m.to_string();
  }
}

TEST(Pricing, HandComputedCosts) {
  // 1000 prompt tokens at $2/Mtok = $0.002; 500 completion tokens at $8/Mtok
  // = $0.004.
  const Pricing p{Money::parse("2"), Money::parse("8")};
  EXPECT_EQ(p.cost({1000, 500}).to_string(), "0.006");
  // One token at $0.15/Mtok is 150000 picodollars exactly.
  const Pricing cheap{Money::parse("0.15"), Money::parse("0.6")};
  EXPECT_EQ(cheap.cost({1, 0}).pico(), 150'000);
  // 0.0000005 pico would need rounding: 1 token at 0.0000015 $/Mtok is
  // 1.5 pico, rounded half-up to 2.
  const Pricing tiny{Money::parse("0.0000015"), Money()};
  EXPECT_EQ(tiny.cost({1, 0}).pico(), 2);
}

// Independent oracle: arbitrary precision, each side rounded half-up.
cpp_int oracle_side(std::int64_t tokens, std::int64_t rate_pico) {
  const cpp_int num = cpp_int(tokens) * rate_pico;
  return (num * 2 + 1'000'000) / 2'000'000;
}

TEST(Pricing, MatchesArbitraryPrecisionOracle) {
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    const auto rp = static_cast<std::int64_t>(rng.below(100'000'000'000'000ULL));
    const auto rc = static_cast<std::int64_t>(rng.below(100'000'000'000'000ULL));
    const Pricing p{Money::from_pico(rp), Money::from_pico(rc)};
    const TokenUsage u{static_cast<std::int64_t>(rng.below(2'000'000)),
                       static_cast<std::int64_t>(rng.below(200'000))};
    const cpp_int expected = oracle_side(u.prompt_tokens, rp) + oracle_side(u.completion_tokens, rc);
    ASSERT_EQ(cpp_int(p.cost(u).pico()), expected);
  }
}

}  // namespace
}  // namespace synthweaver
