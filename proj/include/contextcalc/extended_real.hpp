// Copyright 2026 The contextcalc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONTEXTCALC_EXTENDED_REAL_HPP
#define CONTEXTCALC_EXTENDED_REAL_HPP

#include <compare>
#include <ostream>
#include <string>

#include "contextcalc/errors.hpp"

namespace contextcalc {

/// A non-negative quantity that may be +infinity (divergences, alpha/beta
/// constants). Infinity is a state, never a floating-point Inf, so it cannot
/// leak into arithmetic: value() on an infinite instance throws.
class ExtendedReal {
   public:
    constexpr ExtendedReal() = default;

    static constexpr ExtendedReal finite(double v) { return ExtendedReal(v, false); }
    static constexpr ExtendedReal infinity() { return ExtendedReal(0.0, true); }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }

    double value() const {
        if (infinite_) {
            throw ContractError("ExtendedReal::value() called on +infinity");
        }
        return value_;
    }

    /// Finite value, or `fallback` when infinite.
    constexpr double value_or(double fallback) const { return infinite_ ? fallback : value_; }

    std::string str() const { return infinite_ ? std::string("inf") : std::to_string(value_); }

    friend constexpr bool operator==(const ExtendedReal &a, const ExtendedReal &b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend constexpr std::partial_ordering operator<=>(const ExtendedReal &a, const ExtendedReal &b) {
        if (a.infinite_ || b.infinite_) {
            return a.infinite_ == b.infinite_ ? std::partial_ordering::equivalent
                   : a.infinite_              ? std::partial_ordering::greater
                                              : std::partial_ordering::less;
        }
        return a.value_ <=> b.value_;
    }

   private:
    constexpr ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}

    double value_ = 0.0;
    bool infinite_ = false;
};

inline std::ostream &operator<<(std::ostream &out, const ExtendedReal &x) {
    if (x.is_infinite()) {
        return out << "inf";
    }
    return out << x.value();
}

}  // namespace contextcalc

#endif
