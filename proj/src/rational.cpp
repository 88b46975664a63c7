// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/rational.hpp>

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace drts {

namespace {

std::uint64_t parse_u64(std::string_view digits, std::string_view whole) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw std::invalid_argument("invalid rational '" + std::string(whole) + "'");
    }
    return value;
}

std::string u128_to_string(u128 value) {
    if (value == 0) {
        return "0";
    }
    std::string out;
    while (value != 0) {
        out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(value % 10)));
        value /= 10;
    }
    return out;
}

} // namespace

Rational::Rational(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        throw std::invalid_argument("rational with zero denominator");
    }
    const std::uint64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        return Rational(parse_u64(text.substr(0, slash), text), parse_u64(text.substr(slash + 1), text));
    }
    auto dot = text.find('.');
    if (dot == std::string_view::npos) {
        return Rational(parse_u64(text, text), 1);
    }
    std::string_view integral = text.substr(0, dot);
    std::string_view fraction = text.substr(dot + 1);
    if (fraction.size() > 18 || (integral.empty() && fraction.empty())) {
        throw std::invalid_argument("invalid rational '" + std::string(text) + "'");
    }
    std::uint64_t scale = 1;
    for (std::size_t i = 0; i < fraction.size(); ++i) {
        scale *= 10;
    }
    const u128 whole = integral.empty() ? 0 : parse_u64(integral, text);
    const u128 frac = fraction.empty() ? 0 : parse_u64(fraction, text);
    const u128 num = whole * scale + frac;
    if (num > std::numeric_limits<std::uint64_t>::max()) {
        throw std::overflow_error("rational '" + std::string(text) + "' out of range");
    }
    return Rational(static_cast<std::uint64_t>(num), scale);
}

std::string Rational::to_string() const {
    std::uint64_t rest = den_;
    int twos = 0;
    int fives = 0;
    while (rest % 2 == 0) {
        rest /= 2;
        ++twos;
    }
    while (rest % 5 == 0) {
        rest /= 5;
        ++fives;
    }
    if (rest != 1) {
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    const int digits = std::max(twos, fives);
    u128 scale = 1;
    for (int i = 0; i < digits; ++i) {
        scale *= 10;
    }
    const u128 scaled = static_cast<u128>(num_) * (scale / den_);
    std::string text = u128_to_string(scaled / scale);
    if (digits > 0) {
        std::string frac = u128_to_string(scaled % scale);
        frac.insert(frac.begin(), static_cast<std::size_t>(digits) - frac.size(), '0');
        text += "." + frac;
    }
    return text;
}

std::uint64_t mul_floor(const Rational& value, std::uint64_t factor) {
    const u128 product = static_cast<u128>(value.num()) * factor / value.den();
    if (product > std::numeric_limits<std::uint64_t>::max()) {
        throw std::overflow_error("rational product exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(product);
}

} // namespace drts
