#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace synthweaver {

// Exact US-dollar amount in picodollars (1e-12 USD). Per-token prices are a
// few millionths of a dollar, so integer picodollars keep every sum exact.
class Money {
 public:
  static constexpr std::int64_t kPerDollar = 1'000'000'000'000;

  constexpr Money() = default;
  static constexpr Money from_pico(std::int64_t pico) { return Money(pico); }

  // Parses "12", "0.000002", "-1.5". At most 12 fractional digits.
  // Throws std::invalid_argument.
  static Money parse(std::string_view decimal);

  constexpr std::int64_t pico() const { return pico_; }
  double to_double() const { return static_cast<double>(pico_) / static_cast<double>(kPerDollar); }

  // Shortest exact decimal rendering: "0", "0.13", "0.000002".
  std::string to_string() const;

  Money& operator+=(Money o);
  friend Money operator+(Money a, Money b) { return a += b; }
  friend Money operator*(Money a, std::int64_t n);
  friend constexpr auto operator<=>(const Money&, const Money&) = default;

 private:
  constexpr explicit Money(std::int64_t pico) : pico_(pico) {}
  std::int64_t pico_ = 0;
};

}  // namespace synthweaver
