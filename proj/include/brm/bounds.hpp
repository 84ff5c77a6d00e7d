#pragma once

#include "brm/constants.hpp"

namespace brm {

/// Exponential-kernel rate: the stated bound decays with exp(-(3c/4) * sum
/// of stepsizes); the recursion behind it contracts at c/2. Both are exposed
/// and reported so the two can be compared.
enum class KernelVariant { statement, proof };

/// Per-hit constant: the stated form is 2*B1*G/(2L) with B1 = 8; the
/// recursion's final accounting instead gives (2*B1*G + 2G(1+L/rho))/(2L).
enum class HitVariant { statement, proof };

const char* to_string(KernelVariant v);
const char* to_string(HitVariant v);

struct BoundInputs {
    ConstantsEstimate k;
    double psi0 = 0.0;   // Lyapunov potential at the actual initialization
    double c_var = 1.0;  // unspecified numerical constant in the variance term
    int n = 0;
    int T = 0;
    double c1 = 0.0;
    double c2 = 0.0;
};

/// C_dist = sqrt((1+L/rho)^2 * 2/mu_qg + 2/(alpha*rho)): converts the square
/// root of the Lyapunov potential into an iterate distance.
double c_dist_constant(const ConstantsEstimate& k);

/// Per-hit constant under either accounting (see HitVariant).
double c_hit_constant(const ConstantsEstimate& k, HitVariant hv);

/// Replace-one movement of the saddle itself:
/// (2G/n) ((1+L/rho)^2 / sqrt(mu_pl*mu_qg) + 1/rho).
double saddle_shift_bound(const ConstantsEstimate& k, int n);

struct BoundBreakdown {
    double optimization = 0.0;  // 2*C_dist*sqrt(bias + variance kernel sum)
    double sampling = 0.0;      // saddle-shift term, O(1/n)
    double hit = 0.0;           // C_hit/n
    double total = 0.0;
    double c_dist = 0.0;
    double c_hit = 0.0;
    double rate = 0.0;          // kernel rate actually used (3c/4 or c/2)
};

/// Stability bound with the kernel sums evaluated numerically over the
/// harmonic schedule (O(T), overflow-safe backward recurrence).
BoundBreakdown theorem1_bound(const BoundInputs& in, KernelVariant kv = KernelVariant::statement,
                              HitVariant hv = HitVariant::statement);

/// Same bound with the closed-form kernel evaluations:
/// (c2/(c2+T))^(rate*c1) * psi0 for the bias and
/// c1^2 * coeff / ((1 - rate*c1)(c2+T)) for the variance. Throws
/// ScheduleError when 1 - rate*c1 <= 0 (schedule incompatible with the
/// closed form).
BoundBreakdown corollary_bound(const BoundInputs& in, KernelVariant kv = KernelVariant::statement,
                               HitVariant hv = HitVariant::statement);

} // namespace brm
