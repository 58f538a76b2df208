// Copyright 2026 The scale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Central finite-difference oracle for tape gradients. Test-only.

#include "scale/numkit/tape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace scale::testing {

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

inline double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

/// Compares the tape gradient of `build` (which must return a 1×1 loss) w.r.t. every
/// entry of every parameter against central differences with step `h`.
inline GradCheck check_gradients(const std::vector<num::Parameter*>& params,
                                 const std::function<num::Var(num::Tape&)>& build,
                                 double h = 1e-5) {
    for (auto* p : params) p->zero_grad();
    {
        num::Tape tape;
        num::Var loss = build(tape);
        tape.backward(loss);
    }
    GradCheck out;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            double up;
            {
                num::Tape t;
                up = build(t).value().item();
            }
            p->value[i] = orig - h;
            double down;
            {
                num::Tape t;
                down = build(t).value().item();
            }
            p->value[i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            out.max_rel_error = std::max(out.max_rel_error, rel_error(p->grad[i], numeric));
            ++out.checked;
        }
    }
    return out;
}

} // namespace scale::testing
