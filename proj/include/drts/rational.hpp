// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace drts {

__extension__ using u128 = unsigned __int128;
__extension__ using i128 = __int128;

// Non-negative exact rational, always stored reduced with den > 0.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::uint64_t num, std::uint64_t den);

    static Rational from_integer(std::uint64_t value) { return Rational(value, 1); }

    // Accepts "12", "0.56", "1.220" and "p/q".
    static Rational parse(std::string_view text);

    std::uint64_t num() const { return num_; }
    std::uint64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    // Exact decimal when the denominator is of the form 2^i 5^j, "p/q" otherwise.
    std::string to_string() const;

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
        return static_cast<u128>(lhs.num_) * rhs.den_ <=> static_cast<u128>(rhs.num_) * lhs.den_;
    }

private:
    std::uint64_t num_ = 0;
    std::uint64_t den_ = 1;
};

// floor(value * factor), throwing std::overflow_error past 64 bits.
std::uint64_t mul_floor(const Rational& value, std::uint64_t factor);

} // namespace drts
