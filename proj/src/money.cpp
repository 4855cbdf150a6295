#include "synthweaver/money.hpp"

#include <stdexcept>

namespace synthweaver {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("Money overflow");
  return out;
}

}  // namespace

Money Money::parse(std::string_view s) {
  const std::string original(s);
  if (s.empty()) throw std::invalid_argument("empty decimal");
  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw std::invalid_argument("bad decimal '" + original + "'");
  if (frac.size() > 12) throw std::invalid_argument("more than 12 fractional digits in '" + original + "'");

  std::int64_t pico = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad decimal '" + original + "'");
    if (__builtin_mul_overflow(pico, 10, &pico)) throw std::overflow_error("Money overflow");
    pico = checked_add(pico, c - '0');
  }
  if (__builtin_mul_overflow(pico, kPerDollar, &pico)) throw std::overflow_error("Money overflow");

  std::int64_t scale = kPerDollar / 10;
  for (char c : frac) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad decimal '" + original + "'");
    pico = checked_add(pico, (c - '0') * scale);
    scale /= 10;
  }
  return Money(negative ? -pico : pico);
}

std::string Money::to_string() const {
  std::int64_t v = pico_;
  std::string sign;
  if (v < 0) {
    sign = "-";
    v = -v;
  }
  std::string out = sign + std::to_string(v / kPerDollar);
  std::int64_t frac = v % kPerDollar;
  if (frac == 0) return out;
  std::string digits = std::to_string(frac);
  digits.insert(0, 12 - digits.size(), '0');
  while (!digits.empty() && digits.back() == '0') digits.pop_back();
  return out + "." + digits;
}

Money& Money::operator+=(Money o) {
  pico_ = checked_add(pico_, o.pico_);
  return *this;
}

Money operator*(Money a, std::int64_t n) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a.pico_, n, &out)) throw std::overflow_error("Money overflow");
  return Money(out);
}

}  // namespace synthweaver
