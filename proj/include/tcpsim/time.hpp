#ifndef TCPSIM_TIME_HPP
#define TCPSIM_TIME_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tcpsim {

// Simulation time held as integer nanoseconds so ordering and equality are
// exact. Doubles appear only at the edges (config in, text out).
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }

    static SimTime from_seconds(double s) {
        if (!std::isfinite(s))
            throw std::invalid_argument("time value must be finite");
        double ns = s * 1e9;
        if (ns >= 9.2e18 || ns <= -9.2e18)
            throw std::invalid_argument("time value out of range");
        return SimTime(std::llround(ns));
    }

    // Accepts the trace rendering: decimal seconds, at most 9 fractional
    // digits ("1.35576", "2", "0.010032").
    static SimTime from_string(const std::string& text) {
        if (text.empty())
            throw std::invalid_argument("empty time string");
        std::size_t pos = 0;
        bool neg = false;
        if (text[pos] == '-') {
            neg = true;
            ++pos;
        }
        std::size_t digits_start = pos;
        std::int64_t whole = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            whole = whole * 10 + (text[pos] - '0');
            if (whole > std::numeric_limits<std::int64_t>::max() / 1000000000)
                throw std::invalid_argument("time string out of range: " + text);
            ++pos;
        }
        if (pos == digits_start)
            throw std::invalid_argument("malformed time string: " + text);
        std::int64_t frac = 0;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            std::size_t frac_start = pos;
            std::int64_t scale = 100000000;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                if (pos - frac_start >= 9)
                    throw std::invalid_argument("time string has sub-ns precision: " + text);
                frac += (text[pos] - '0') * scale;
                scale /= 10;
                ++pos;
            }
            if (pos == frac_start)
                throw std::invalid_argument("malformed time string: " + text);
        }
        if (pos != text.size())
            throw std::invalid_argument("malformed time string: " + text);
        std::int64_t total = whole * 1000000000 + frac;
        return SimTime(neg ? -total : total);
    }

    constexpr std::int64_t ns() const { return ns_; }
    double seconds() const { return static_cast<double>(ns_) * 1e-9; }

    // Shortest decimal form that parses back to the same nanosecond count.
    std::string to_string() const {
        std::int64_t v = ns_;
        std::string sign;
        if (v < 0) {
            sign = "-";
            v = -v;
        }
        std::int64_t whole = v / 1000000000;
        std::int64_t frac = v % 1000000000;
        if (frac == 0)
            return sign + std::to_string(whole);
        std::string f(9, '0');
        for (int i = 8; i >= 0; --i) {
            f[static_cast<std::size_t>(i)] = static_cast<char>('0' + frac % 10);
            frac /= 10;
        }
        while (f.back() == '0')
            f.pop_back();
        return sign + std::to_string(whole) + "." + f;
    }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
    constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
    SimTime& operator+=(SimTime o) {
        ns_ += o.ns_;
        return *this;
    }

private:
    explicit constexpr SimTime(std::int64_t ns) : ns_(ns) {}
    std::int64_t ns_ = 0;
};

}  // namespace tcpsim

#endif
