#include "bfmle/polynomial.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "bfmle/error.hpp"

namespace bfmle {

void write_terms(std::ostream& out, const DPoly& poly) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(17);
    for (const auto& [e, c] : poly.terms()) {
        for (std::size_t i = 0; i < e.size(); ++i) out << (i ? " " : "") << e[i];
        out << " : " << c << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

CompiledSystem::CompiledSystem(const CSystem& system) {
    if (system.empty()) return;
    nvars_ = system.front().nvars();
    offsets_.push_back(0);
    for (const CPoly& poly : system) {
        if (poly.nvars() != nvars_) throw Error(ErrorCode::DimensionMismatch, "polynomials over different variables");
        for (const auto& [e, c] : poly.terms()) {
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw Error(ErrorCode::NonFinite, "non-finite coefficient");
            terms_.push_back({c, exps_.size()});
            for (int k : e) {
                if (k < 0 || k > std::numeric_limits<std::uint8_t>::max())
                    throw Error(ErrorCode::InvalidArgument, "exponent out of range");
                exps_.push_back(static_cast<std::uint8_t>(k));
                max_exp_ = std::max(max_exp_, k);
            }
        }
        offsets_.push_back(terms_.size());
        degrees_.push_back(poly.degree());
    }
}

std::vector<int> CompiledSystem::degrees() const { return degrees_; }

std::vector<double> CompiledSystem::coefficient_scales() const {
    std::vector<double> scales(equations(), 0.0);
    for (std::size_t i = 0; i < equations(); ++i)
        for (std::size_t t = offsets_[i]; t < offsets_[i + 1]; ++t) scales[i] = std::max(scales[i], std::abs(terms_[t].coeff));
    return scales;
}

void CompiledSystem::evaluate(std::span<const Complex> x, std::span<Complex> value, std::span<Complex> jac) const {
    const std::size_t n = nvars_;
    const std::size_t stride = static_cast<std::size_t>(max_exp_) + 1;
    std::vector<Complex> pw(n * stride);
    for (std::size_t j = 0; j < n; ++j) {
        pw[j * stride] = 1.0;
        for (std::size_t e = 1; e < stride; ++e) pw[j * stride + e] = pw[j * stride + e - 1] * x[j];
    }

    const bool want_value = !value.empty();
    const bool want_jac = !jac.empty();
    for (std::size_t i = 0; i < equations(); ++i) {
        Complex acc = 0.0;
        if (want_jac)
            for (std::size_t m = 0; m < n; ++m) jac[i * n + m] = 0.0;
        for (std::size_t t = offsets_[i]; t < offsets_[i + 1]; ++t) {
            const Term& term = terms_[t];
            const std::uint8_t* e = &exps_[term.first_exp];
            if (want_value) {
                Complex v = term.coeff;
                for (std::size_t j = 0; j < n; ++j) v *= pw[j * stride + e[j]];
                acc += v;
            }
            if (want_jac) {
                for (std::size_t m = 0; m < n; ++m) {
                    if (e[m] == 0) continue;
                    Complex d = term.coeff * static_cast<double>(e[m]) * pw[m * stride + e[m] - 1];
                    for (std::size_t j = 0; j < n; ++j)
                        if (j != m) d *= pw[j * stride + e[j]];
                    jac[i * n + m] += d;
                }
            }
        }
        if (want_value) value[i] = acc;
    }
}

} // namespace bfmle
