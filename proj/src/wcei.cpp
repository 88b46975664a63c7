// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/wcei.hpp>

#include <algorithm>
#include <limits>

namespace drts {

namespace {

constexpr i128 kI128Max = std::numeric_limits<i128>::max();

std::string window_error(const ExecutionTrace& trace, Cycles t_unit) {
    return "trace '" + trace.label() + "' spans " + std::to_string(trace.duration()) + " cycles, shorter than t_unit " +
           std::to_string(t_unit);
}

void require_windows(const ExecutionTrace& trace, Cycles t_unit) {
    if (t_unit == 0) {
        throw WceiError("t_unit must be positive");
    }
    if (trace.duration() < t_unit) {
        throw WceiError(window_error(trace, t_unit));
    }
}

// Deficit of the line a*t against observed windows, scaled by den(a):
//   num(a)*t - den(a)*observed
// Only the durations just before each later sample (and the trace end) need
// checking, because the observed count is a step function of t.
class DeficitScan {
public:
    DeficitScan(const ExecutionTrace& trace, const Rational& a, Cycles t_unit)
        : trace_(trace), p_(a.num()), q_(a.den()), t_unit_(t_unit) {
        const u128 limit = static_cast<u128>(kI128Max) / 4;
        if (static_cast<u128>(p_) * (trace.end_cycle() + 1) > limit ||
            static_cast<u128>(q_) * (trace.total_retired() + 1) > limit) {
            throw std::overflow_error("rate and trace too large for exact deficit arithmetic");
        }
    }

    // Maximum scaled deficit over all windows, or nullopt when no window of
    // length >= t_unit exists.
    std::optional<i128> max_deficit() const {
        const auto s = trace_.samples();
        const Cycles end = trace_.end_cycle();
        std::optional<i128> best;
        i128 prefix_min = kI128Max;
        std::size_t next_start = 0;
        for (std::size_t j = 1; j < s.size(); ++j) {
            // Starts i with c_i <= c_j - 1 - t_unit.
            while (next_start < s.size() && s[next_start].cycle + t_unit_ + 1 <= s[j].cycle) {
                prefix_min = std::min(prefix_min, g(s[next_start]));
                ++next_start;
            }
            if (prefix_min != kI128Max) {
                const i128 h = static_cast<i128>(p_) * (s[j].cycle - 1) - static_cast<i128>(q_) * s[j - 1].retired;
                best = std::max(best.value_or(h - prefix_min), h - prefix_min);
            }
        }
        // Windows running to the trace end.
        const i128 h_end = static_cast<i128>(p_) * end - static_cast<i128>(q_) * trace_.total_retired();
        for (std::size_t i = 0; i < s.size() && s[i].cycle + t_unit_ <= end; ++i) {
            const i128 d = h_end - g(s[i]);
            best = std::max(best.value_or(d), d);
        }
        return best;
    }

    template <typename Visit>
    void for_each_window(Visit&& visit) const {
        const auto s = trace_.samples();
        const Cycles end = trace_.end_cycle();
        for (std::size_t i = 0; i < s.size() && s[i].cycle + t_unit_ <= end; ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                const Cycles t = s[j].cycle - 1 - s[i].cycle;
                if (t < t_unit_) {
                    continue;
                }
                if (!visit(s[i].cycle, t, s[j - 1].retired - s[i].retired)) {
                    return;
                }
            }
            if (!visit(s[i].cycle, end - s[i].cycle, trace_.total_retired() - s[i].retired)) {
                return;
            }
        }
    }

private:
    i128 g(const TraceSample& s) const {
        return static_cast<i128>(p_) * s.cycle - static_cast<i128>(q_) * s.retired;
    }

    const ExecutionTrace& trace_;
    std::uint64_t p_;
    std::uint64_t q_;
    Cycles t_unit_;
};

template <typename Better>
Instructions extreme_window(const ExecutionTrace& trace, Cycles t_unit, Better better) {
    require_windows(trace, t_unit);
    const auto s = trace.samples();
    const Cycles end = trace.end_cycle();
    std::size_t j = 0;
    std::optional<Instructions> best;
    for (std::size_t i = 0; i < s.size() && s[i].cycle + t_unit <= end; ++i) {
        const Cycles target = s[i].cycle + t_unit;
        while (j + 1 < s.size() && s[j + 1].cycle <= target) {
            ++j;
        }
        const Instructions w = s[j].retired - s[i].retired;
        if (!best || better(w, *best)) {
            best = w;
        }
    }
    return *best;
}

} // namespace

void WceiFunction::validate() const {
    if (a.is_zero()) {
        throw WceiError("WCEI rate a must be positive");
    }
    if (t_unit == 0) {
        throw WceiError("WCEI t_unit must be positive");
    }
    const u128 scaled = static_cast<u128>(a.num()) * t_unit;
    const u128 ceil_at = (scaled + a.den() - 1) / a.den();
    if (static_cast<u128>(b) > ceil_at) {
        throw WceiError("WCEI intercept b = " + std::to_string(b) + " exceeds a*t_unit");
    }
}

Instructions evaluate(const WceiFunction& f, Cycles t) {
    if (t < f.t_unit) {
        throw WceiError("WCEI evaluated at t = " + std::to_string(t) + " below t_unit " + std::to_string(f.t_unit));
    }
    const u128 line = static_cast<u128>(f.a.num()) * t;
    const u128 penalty = static_cast<u128>(f.a.den()) * f.b;
    if (line <= penalty) {
        return 0;
    }
    const u128 value = (line - penalty) / f.a.den();
    if (value > std::numeric_limits<Instructions>::max()) {
        throw std::overflow_error("WCEI budget exceeds 64 bits");
    }
    return static_cast<Instructions>(value);
}

Cycles invert(const WceiFunction& f, Instructions i) {
    if (f.a.is_zero()) {
        throw WceiError("cannot invert a WCEI function with a = 0");
    }
    const u128 need = static_cast<u128>(i) + f.b;
    const u128 den = f.a.den();
    if (need != 0 && need > std::numeric_limits<u128>::max() / den) {
        throw std::overflow_error("WCEI inverse overflows");
    }
    const u128 value = (need * den + f.a.num() - 1) / f.a.num();
    if (value > std::numeric_limits<Cycles>::max()) {
        throw std::overflow_error("WCEI inverse exceeds 64 bits");
    }
    return static_cast<Cycles>(value);
}

Rational estimate_rate(const ExecutionTrace& trace, Cycles t_unit) {
    return Rational(extreme_window(trace, t_unit, std::less<>{}), t_unit);
}

Rational best_rate(const ExecutionTrace& trace, Cycles t_unit) {
    return Rational(extreme_window(trace, t_unit, std::greater<>{}), t_unit);
}

Instructions estimate_intercept(const ExecutionTrace& trace, const Rational& a, Cycles t_unit) {
    require_windows(trace, t_unit);
    const auto deficit = DeficitScan(trace, a, t_unit).max_deficit();
    if (!deficit || *deficit <= 0) {
        return 0;
    }
    const i128 q = a.den();
    return static_cast<Instructions>((*deficit + q - 1) / q);
}

WceiFunction fit_wcei(const ExecutionTrace& trace, Cycles t_unit) {
    WceiFunction f;
    f.a = estimate_rate(trace, t_unit);
    if (f.a.is_zero()) {
        throw WceiError("trace '" + trace.label() + "' has a window with no retired instructions");
    }
    f.b = estimate_intercept(trace, f.a, t_unit);
    f.t_unit = t_unit;
    return f;
}

LossReport worst_case_loss(const Rational& wcei_rate, const Rational& best) {
    if (wcei_rate.is_zero()) {
        throw WceiError("WCEI rate must be positive");
    }
    if (wcei_rate > best) {
        throw WceiError("WCEI rate " + wcei_rate.to_string() + " exceeds best rate " + best.to_string());
    }
    // 100 * (best - wcei) / best = 100 * (1 - wcei/best)
    const long double w = static_cast<long double>(wcei_rate.num()) * best.den();
    const long double bst = static_cast<long double>(best.num()) * wcei_rate.den();
    LossReport report{wcei_rate, best, static_cast<double>(100.0L * (bst - w) / bst)};
    return report;
}

SafetyReport validate_safety(const WceiFunction& f, const ExecutionTrace& trace, std::size_t max_reported) {
    f.validate();
    max_reported = std::max<std::size_t>(max_reported, 1);
    SafetyReport report;
    DeficitScan scan(trace, f.a, f.t_unit);
    // Violation iff floor(a*t - b) > observed iff a*t - b - observed >= 1.
    const i128 threshold = static_cast<i128>(f.a.den()) * (static_cast<i128>(f.b) + 1);
    const auto worst = scan.max_deficit();
    if (!worst || *worst < threshold) {
        return report;
    }
    report.safe = false;
    scan.for_each_window([&](Cycles start, Cycles t, Instructions observed) {
        const Instructions guaranteed = evaluate(f, t);
        if (guaranteed > observed) {
            if (report.violations.size() == max_reported) {
                report.truncated = true;
                return false;
            }
            report.violations.push_back({start, t, guaranteed, observed});
        }
        return true;
    });
    return report;
}

} // namespace drts
