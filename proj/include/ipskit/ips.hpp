#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipskit/circuit.hpp"
#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/field.hpp"
#include "ipskit/poly.hpp"

namespace ipskit {

enum class CertKind : std::uint8_t { Refutation, Derivation };

// A circuit over x and placeholder variables f, claimed to satisfy
// C(x,0)=0 and C(x,F(x))=target (target 1 for refutations).
struct Certificate {
    Circuit circuit;
    PolySystem system;
    CertKind kind = CertKind::Refutation;
    Circuit target; // used when kind == Derivation

    Circuit target_circuit() const {
        if (kind == CertKind::Derivation) return target;
        Circuit one;
        one.outputs = {one.add_const(1)};
        return one;
    }
};

struct Verdict {
    bool accepted = false;
    enum class Mode : std::uint8_t { Exact, Randomized } mode = Mode::Exact;
    std::uint32_t trials = 0;
    int failure_condition = 0; // 0 = none
    double soundness_bound = 0.0;
};

namespace detail {

inline std::map<VarId, Circuit> zero_bindings(std::size_t m) {
    std::map<VarId, Circuit> b;
    Circuit zero;
    zero.outputs = {zero.add_const(0)};
    for (std::size_t i = 1; i <= m; ++i) b[VarId::F(static_cast<std::uint32_t>(i))] = zero;
    return b;
}

inline std::map<VarId, Circuit> system_bindings(const PolySystem& sys) {
    std::map<VarId, Circuit> b;
    for (std::size_t i = 0; i < sys.equations.size(); ++i)
        b[VarId::F(static_cast<std::uint32_t>(i + 1))] = sys.equations[i];
    return b;
}

// Appends all nodes of src into dst, returning the new index of src's output.
inline std::uint32_t append_circuit(Circuit& dst, const Circuit& src) {
    if (src.outputs.size() != 1) throw InputError("append_circuit needs single-output source");
    std::uint32_t base = static_cast<std::uint32_t>(dst.nodes.size());
    for (const Node& n : src.nodes) {
        Node m = n;
        for (auto& ch : m.children) ch += base;
        dst.nodes.push_back(std::move(m));
    }
    return base + src.outputs[0];
}

} // namespace detail

// The two condition circuits of a certificate: C(x, 0) and C(x, F(x)) - target.
inline std::pair<Circuit, Circuit> condition_circuits(const Certificate& cert) {
    std::size_t m = cert.system.size();
    if (cert.circuit.max_fvar() > m)
        throw InputError("certificate uses placeholder beyond system size");
    Circuit cond1 = substitute(cert.circuit, detail::zero_bindings(m));
    Circuit bound = substitute(cert.circuit, detail::system_bindings(cert.system));
    Circuit tgt = cert.target_circuit();
    Circuit cond2 = bound;
    std::uint32_t lhs = cond2.outputs[0];
    std::uint32_t rhs = detail::append_circuit(cond2, tgt);
    cond2.outputs = {cond2.add_lin({1, -1}, {lhs, rhs})};
    return {cond1, cond2};
}

struct RandomizedOptions {
    std::uint32_t trials = 20;
    std::optional<std::uint64_t> prime; // default: next prime above max(10^6, 100*degbound)
};

inline Verdict verify_exact(const Certificate& cert, const Caps& caps = Caps{}) {
    auto [cond1, cond2] = condition_circuits(cert);
    Verdict v;
    v.mode = Verdict::Mode::Exact;
    v.soundness_bound = 0.0;
    if (!expand_circuit(cond1, caps, cert.system.modulus).is_zero()) {
        v.accepted = false;
        v.failure_condition = 1;
        return v;
    }
    if (!expand_circuit(cond2, caps, cert.system.modulus).is_zero()) {
        v.accepted = false;
        v.failure_condition = 2;
        return v;
    }
    v.accepted = true;
    return v;
}

inline Verdict verify_randomized(const Certificate& cert, RandomSource& rng,
                                 const RandomizedOptions& opt = RandomizedOptions{}) {
    auto [cond1, cond2] = condition_circuits(cert);
    if (!cond1.division_free() || !cond2.division_free())
        throw InputError("randomized verification requires division-free circuits");
    std::uint64_t d1 = metrics(cond1).syntactic_degree_bound;
    std::uint64_t d2 = metrics(cond2).syntactic_degree_bound;
    std::uint64_t dmax = std::max(d1, d2);
    std::uint64_t pv;
    if (opt.prime) {
        pv = *opt.prime;
        if (pv <= 100 * dmax)
            throw PrimeTooSmall("need p > 100 * degree bound = " + std::to_string(100 * dmax));
    } else if (cert.system.modulus != 0) {
        pv = cert.system.modulus; // sampling must stay in the system's field
        if (pv <= 100 * dmax)
            throw PrimeTooSmall("system modulus " + std::to_string(pv) +
                                " is at most 100 * degree bound = " + std::to_string(100 * dmax));
    } else {
        pv = next_prime_at_least(std::max<std::uint64_t>(1'000'000, 100 * dmax + 1));
    }
    if (cert.system.modulus != 0 && cert.system.modulus != pv)
        throw PrimeTooSmall("system modulus " + std::to_string(cert.system.modulus) +
                            " incompatible with sampling prime " + std::to_string(pv));
    Prime p(pv);
    std::uint32_t n = std::max({cond1.n_xvars(), cond2.n_xvars(), cert.system.n_vars});
    Verdict v;
    v.mode = Verdict::Mode::Randomized;
    v.trials = opt.trials;
    v.accepted = true;
    for (std::uint32_t t = 0; t < opt.trials && v.accepted; ++t) {
        std::map<VarId, FieldElement> pt;
        for (std::uint32_t i = 1; i <= n; ++i) pt[VarId::X(i)] = fp_sample(rng, p);
        if (!evaluate(cond1, pt, p)[0].is_zero()) {
            v.accepted = false;
            v.failure_condition = 1;
        } else if (!evaluate(cond2, pt, p)[0].is_zero()) {
            v.accepted = false;
            v.failure_condition = 2;
        }
    }
    double q1 = std::pow(static_cast<double>(d1) / static_cast<double>(pv), opt.trials);
    double q2 = std::pow(static_cast<double>(d2) / static_cast<double>(pv), opt.trials);
    v.soundness_bound = std::min(1.0, q1 + q2);
    return v;
}

// ---------------------------------------------------------------- predicates

namespace detail {

inline std::pair<Monomial, Monomial> split_xf(const Monomial& m) {
    Monomial x, f;
    for (const auto& [v, e] : m.exps)
        (v.cls == VarId::Class::X ? x : f).exps.push_back({v, e});
    return {x, f};
}

} // namespace detail

inline bool is_hilbert_like(const Certificate& cert, const Caps& caps = Caps{}) {
    if (!cert.circuit.division_free())
        throw InputError("is_hilbert_like requires a division-free certificate");
    SparsePoly p = expand_circuit(cert.circuit, caps, cert.system.modulus);
    for (const auto& [m, c] : p.terms()) {
        auto [x, f] = detail::split_xf(m);
        if (f.total_degree() != 1) return false;
    }
    return true;
}

inline bool is_zero_certificate(const Circuit& c, const PolySystem& sys,
                                const Caps& caps = Caps{}) {
    Certificate cert;
    cert.circuit = c;
    cert.system = sys;
    cert.kind = CertKind::Derivation;
    Circuit zero;
    zero.outputs = {zero.add_const(0)};
    cert.target = zero;
    return verify_exact(cert, caps).accepted;
}

inline bool is_zero_certificate_randomized(const Circuit& c, const PolySystem& sys,
                                           RandomSource& rng,
                                           const RandomizedOptions& opt = RandomizedOptions{}) {
    Certificate cert;
    cert.circuit = c;
    cert.system = sys;
    cert.kind = CertKind::Derivation;
    Circuit zero;
    zero.outputs = {zero.add_const(0)};
    cert.target = zero;
    return verify_randomized(cert, rng, opt).accepted;
}

// ---------------------------------------------------------------- hilbertize

// Converts a general certificate to a placeholder-linear one: each f-monomial
// f^e with least positive index i0 is replaced by
//   f_{i0} * F_{i0}^{e_{i0}-1} * prod_{j>i0} F_j^{e_j},
// which agrees with f^e under the substitution f=F and vanishes at f=0.
inline Certificate hilbertize(const Certificate& cert, const Caps& caps = Caps{}) {
    if (!cert.circuit.division_free())
        throw InputError("hilbertize requires a division-free certificate");
    SparsePoly expanded = expand_circuit(cert.circuit, caps, cert.system.modulus);
    // Gather x-coefficients per f-monomial.
    std::map<Monomial, SparsePoly, MonoLexLess> groups;
    for (const auto& [m, c] : expanded.terms()) {
        auto [x, f] = detail::split_xf(m);
        auto [it, inserted] =
            groups.try_emplace(f, SparsePoly(cert.system.modulus));
        it->second.add_term(x, c);
    }
    Circuit b;
    std::vector<std::int64_t> coeffs;
    std::vector<std::uint32_t> terms;
    for (const auto& [fmono, xcoef] : groups) {
        std::uint32_t croot = detail::append_circuit(b, poly_to_circuit(xcoef));
        if (fmono.is_one()) {
            // Nonzero pure-x part: the input violated condition 1; keep it so
            // the output misverifies exactly where the input did.
            coeffs.push_back(1);
            terms.push_back(croot);
            continue;
        }
        std::vector<std::uint32_t> factors{croot};
        const auto& [v0, e0] = fmono.exps.front();
        factors.push_back(b.add_var(v0));
        for (std::uint32_t k = 1; k < e0; ++k)
            factors.push_back(detail::append_circuit(b, cert.system.equations[v0.index - 1]));
        for (std::size_t j = 1; j < fmono.exps.size(); ++j) {
            const auto& [vj, ej] = fmono.exps[j];
            for (std::uint32_t k = 0; k < ej; ++k)
                factors.push_back(detail::append_circuit(b, cert.system.equations[vj.index - 1]));
        }
        coeffs.push_back(1);
        terms.push_back(b.add_prod(factors));
    }
    if (terms.empty()) {
        b.outputs = {b.add_const(0)};
    } else {
        b.outputs = {b.add_lin(coeffs, terms)};
    }
    Certificate out = cert;
    out.circuit = std::move(b);
    return out;
}

// ---------------------------------------------------------------- RIPS -> IPS

// Converts a rational certificate C'/D into a division-free one, given a
// refutation certificate E(x, f, d) for the augmented system {F_1..F_m, D_F}
// (the statement "D vanishes and F has a common zero" is unsatisfiable).
// Writing E = d*Delta + E', the output is C' * Delta(x,f,D) + G * E'.
inline Certificate rips_to_ips(const Circuit& certNum, const Circuit& certDen,
                               const Certificate& inverse_cert, const Circuit& target,
                               const Caps& caps = Caps{}) {
    const PolySystem& aug = inverse_cert.system;
    if (aug.equations.empty()) throw InputError("augmented system is empty");
    const std::size_t m = aug.equations.size() - 1; // base system size
    const std::uint64_t mod = aug.modulus;

    // The last augmented equation must be D evaluated at f = F.
    {
        PolySystem base_view = aug;
        base_view.equations.pop_back();
        Circuit den_sub = substitute(certDen, detail::system_bindings(base_view));
        SparsePoly lhs = expand_circuit(den_sub, caps, mod);
        SparsePoly rhs = expand_circuit(aug.equations.back(), caps, mod);
        if (!poly_equal(lhs, rhs))
            throw InverseCertInvalid("last augmented equation does not match the denominator");
    }
    if (inverse_cert.kind != CertKind::Refutation ||
        !verify_exact(inverse_cert, caps).accepted)
        throw InverseCertInvalid("inverse certificate fails exact verification");

    // Split E on the placeholder d = f_{m+1} by exact expansion.
    const VarId d = VarId::F(static_cast<std::uint32_t>(m + 1));
    SparsePoly e_poly;
    try {
        e_poly = expand_circuit(inverse_cert.circuit, caps, mod);
    } catch (const CapError& e) {
        throw SplitBlowup(std::string("splitting the inverse certificate: ") + e.what());
    }
    SparsePoly delta(mod), e_prime(mod);
    for (const auto& [mono, c] : e_poly.terms()) {
        std::uint32_t de = mono.exponent(d);
        if (de == 0) {
            e_prime.add_term(mono, c);
        } else {
            Monomial rest;
            for (const auto& [v, e] : mono.exps) {
                if (v == d) {
                    if (de > 1) rest.exps.push_back({v, de - 1});
                } else {
                    rest.exps.push_back({v, e});
                }
            }
            delta.add_term(rest, c);
        }
    }
    // Delta(x, f, D(x,f)): substitute the denominator circuit for d.
    Circuit delta_c = substitute(poly_to_circuit(delta), {{d, certDen}});
    Circuit eprime_c = poly_to_circuit(e_prime);

    Circuit b;
    std::uint32_t num_root = detail::append_circuit(b, certNum);
    std::uint32_t delta_root = detail::append_circuit(b, delta_c);
    std::uint32_t g_root = detail::append_circuit(b, target);
    std::uint32_t ep_root = detail::append_circuit(b, eprime_c);
    std::uint32_t t1 = b.add_prod({num_root, delta_root});
    std::uint32_t t2 = b.add_prod({g_root, ep_root});
    b.outputs = {b.add_lin({1, 1}, {t1, t2})};

    Certificate out;
    out.circuit = std::move(b);
    out.system = aug;
    out.system.equations.pop_back();
    out.system.provenance.pop_back();
    out.kind = CertKind::Derivation;
    out.target = target;
    if (!out.circuit.division_free())
        throw InverseCertInvalid("inputs to rips_to_ips must be division-free circuits");
    if (!verify_exact(out, caps).accepted)
        throw InverseCertInvalid("constructed certificate fails verification; "
                                 "the rational certificate is not valid for this target");
    return out;
}

} // namespace ipskit
