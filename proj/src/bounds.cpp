#include "brm/bounds.hpp"

#include <cmath>

#include "brm/errors.hpp"
#include "brm/sgda.hpp"

namespace brm {

const char* to_string(KernelVariant v) {
    return v == KernelVariant::statement ? "statement" : "proof";
}
const char* to_string(HitVariant v) { return v == HitVariant::statement ? "statement" : "proof"; }

namespace {

constexpr double kB1 = 8.0;  // numerical constant in the per-hit accounting

void check_inputs(const BoundInputs& in) {
    if (in.n < 1 || in.T < 0) throw DomainError("bound: n must be positive and T nonnegative");
    if (!(in.c1 > 0.0) || !(in.c2 > 0.0)) throw DomainError("bound: c1 and c2 must be positive");
    if (!(in.psi0 >= 0.0)) throw DomainError("bound: psi0 must be nonnegative");
    if (!(in.c_var > 0.0)) throw DomainError("bound: C_var must be positive");
    const ConstantsEstimate& k = in.k;
    if (!(k.L_hat > 0.0) || !(k.G_hat > 0.0) || !(k.rho_hat > 0.0) || !(k.mu_pl_hat > 0.0) ||
        !(k.mu_qg_hat > 0.0) || !(k.alpha > 0.0) || !std::isfinite(k.alpha))
        throw DomainError("bound: constants must be positive and finite");
}

double kernel_rate(const ConstantsEstimate& k, KernelVariant kv) {
    const double c = std::min(k.mu_pl_hat / 2.0, k.rho_hat / 2.0);
    return kv == KernelVariant::statement ? 0.75 * c : 0.5 * c;
}

double variance_coeff(const BoundInputs& in) {
    const ConstantsEstimate& k = in.k;
    const double cond = 1.0 + k.L_hat / k.rho_hat;
    return in.c_var * (k.L_hat * cond + k.alpha * k.L_hat * k.L_hat / k.rho_hat) * k.G_hat *
           k.G_hat;
}

BoundBreakdown assemble(const BoundInputs& in, KernelVariant kv, HitVariant hv,
                        double inside_sqrt) {
    BoundBreakdown out;
    out.rate = kernel_rate(in.k, kv);
    out.c_dist = c_dist_constant(in.k);
    out.c_hit = c_hit_constant(in.k, hv);
    out.optimization = 2.0 * out.c_dist * std::sqrt(std::max(inside_sqrt, 0.0));
    out.sampling = saddle_shift_bound(in.k, in.n);
    out.hit = out.c_hit / in.n;
    out.total = out.optimization + out.sampling + out.hit;
    return out;
}

} // namespace

double c_dist_constant(const ConstantsEstimate& k) {
    const double cond = 1.0 + k.L_hat / k.rho_hat;
    return std::sqrt(cond * cond * 2.0 / k.mu_qg_hat + 2.0 / (k.alpha * k.rho_hat));
}

double c_hit_constant(const ConstantsEstimate& k, HitVariant hv) {
    // Per-hit displacement constant over the smoothness scale 2L.
    if (hv == HitVariant::statement) return 2.0 * kB1 * k.G_hat / (2.0 * k.L_hat);
    const double cond = 1.0 + k.L_hat / k.rho_hat;
    return (2.0 * kB1 * k.G_hat + 2.0 * k.G_hat * cond) / (2.0 * k.L_hat);
}

double saddle_shift_bound(const ConstantsEstimate& k, int n) {
    const double cond = 1.0 + k.L_hat / k.rho_hat;
    return (2.0 * k.G_hat / n) *
           (cond * cond / std::sqrt(k.mu_pl_hat * k.mu_qg_hat) + 1.0 / k.rho_hat);
}

BoundBreakdown theorem1_bound(const BoundInputs& in, KernelVariant kv, HitVariant hv) {
    check_inputs(in);
    const double rate = kernel_rate(in.k, kv);
    // Backward sweep: weight = exp(-rate * sum_{s=t+1}^{T-1} eta_s) starts at
    // 1 for t = T-1 and shrinks multiplicatively, so nothing can overflow.
    double weight = 1.0;
    double kernel_sum = 0.0;
    for (int t = in.T - 1; t >= 0; --t) {
        const double eta = harmonic_stepsize(t, in.c1, in.c2);
        kernel_sum += eta * eta * weight;
        weight *= std::exp(-rate * eta);
    }
    // After the sweep, weight = exp(-rate * sum_{s<T} eta_s): the bias kernel.
    const double inside = weight * in.psi0 + variance_coeff(in) * kernel_sum;
    return assemble(in, kv, hv, inside);
}

BoundBreakdown corollary_bound(const BoundInputs& in, KernelVariant kv, HitVariant hv) {
    check_inputs(in);
    const double rate = kernel_rate(in.k, kv);
    const double geo = 1.0 - rate * in.c1;
    if (geo <= 0.0)
        throw ScheduleError("corollary_bound: 1 - rate*c1 = " + std::to_string(geo) +
                            " is nonpositive; closed form undefined for this schedule");
    const double bias = std::pow(in.c2 / (in.c2 + in.T), rate * in.c1) * in.psi0;
    const double variance = variance_coeff(in) * in.c1 * in.c1 / (geo * (in.c2 + in.T));
    return assemble(in, kv, hv, bias + variance);
}

} // namespace brm
