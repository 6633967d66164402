#pragma once

// Buchberger-based engine: ideal membership (with cofactor witnesses that
// become placeholder-linear derivation certificates), radical membership via
// the Rabinowitsch device, syzygy generators among the system polynomials,
// and f-only relation bases obtained by eliminating the x-variables.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/ips.hpp"
#include "ipskit/poly.hpp"

namespace ipskit {

struct GroebnerBasis {
    std::vector<SparsePoly> generators;
    MonoOrder order = MonoOrder::GrevLex;
    // When tracked: cofactors[k][j] with generators[k] = sum_j cofactors[k][j] * input_j.
    std::vector<std::vector<SparsePoly>> cofactors;
    std::size_t n_inputs = 0;
};

// Each generator (g_1,...,g_m) satisfies sum_i g_i * F_i = 0 exactly.
using ModuleElem = std::vector<SparsePoly>;
struct SyzygyGenerators {
    std::size_t arity = 0;
    std::vector<ModuleElem> generators;
};

namespace detail {

inline std::uint64_t common_modulus(const std::vector<SparsePoly>& polys) {
    if (polys.empty()) throw InputError("empty polynomial system");
    std::uint64_t mod = polys[0].modulus();
    if (mod == 0) throw UnsupportedModulus("basis computation requires a prime modulus");
    for (const auto& p : polys)
        if (p.modulus() != mod) throw ModulusMismatch("system polynomials under different moduli");
    return mod;
}

inline Coef field_inv(const Coef& c, std::uint64_t mod) {
    Prime p(mod);
    Coef r = c % Coef(mod);
    if (r < 0) r += Coef(mod);
    return Coef(fp_inverse(FieldElement(r.convert_to<std::uint64_t>(), p)).value);
}

struct BuchbergerRun {
    std::vector<SparsePoly> gens;
    std::vector<std::vector<SparsePoly>> rows;      // gens[k] = sum_j rows[k][j] * input_j
    std::vector<std::vector<SparsePoly>> syzygies;  // rows over gens; each sums to zero
    std::size_t n_inputs = 0;
};

// Every S-pair is processed (no coprime-pair shortcut) so that the recorded
// reductions generate the full first syzygy module of the final basis.
// Pair selection: smallest lcm degree, then smallest (i, j).
inline BuchbergerRun buchberger_run(const std::vector<SparsePoly>& inputs, MonoOrder ord,
                                    bool track, const Caps& caps) {
    const std::uint64_t mod = common_modulus(inputs);
    BuchbergerRun run;
    run.n_inputs = inputs.size();
    auto unit_row = [&](std::size_t j) {
        std::vector<SparsePoly> row(inputs.size(), SparsePoly(mod));
        row[j].add_term(Monomial::one(), 1);
        return row;
    };
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        if (inputs[j].is_zero()) continue;
        run.gens.push_back(inputs[j]);
        if (track) run.rows.push_back(unit_row(j));
    }

    struct Pair { std::size_t i, j; std::uint64_t deg; };
    std::vector<Pair> pending;
    auto add_pairs_for = [&](std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) {
            Monomial l = mono_lcm(run.gens[i].leading_term(ord).first,
                                  run.gens[k].leading_term(ord).first);
            pending.push_back({i, k, l.total_degree()});
        }
    };
    for (std::size_t k = 0; k < run.gens.size(); ++k) add_pairs_for(k);

    while (!pending.empty()) {
        auto best = std::min_element(pending.begin(), pending.end(),
                                     [](const Pair& a, const Pair& b) {
                                         return std::tie(a.deg, a.i, a.j) <
                                                std::tie(b.deg, b.i, b.j);
                                     });
        Pair pr = *best;
        pending.erase(best);

        auto [lmi, lci] = run.gens[pr.i].leading_term(ord);
        auto [lmj, lcj] = run.gens[pr.j].leading_term(ord);
        Monomial l = mono_lcm(lmi, lmj);
        Monomial qi = mono_div(l, lmi).first;
        Monomial qj = mono_div(l, lmj).first;
        Coef ci = field_inv(lci, mod);
        Coef cj = field_inv(lcj, mod);
        SparsePoly s = run.gens[pr.i].times_monomial(qi, ci) -
                       run.gens[pr.j].times_monomial(qj, cj);
        s.enforce_caps(caps);
        DivisionResult red = poly_divide(s, run.gens, ord, caps);

        if (red.remainder.is_zero()) {
            if (track) {
                std::vector<SparsePoly> z(run.gens.size(), SparsePoly(mod));
                z[pr.i].add_term(qi, ci);
                z[pr.j].add_term(qj, -cj);
                for (std::size_t k = 0; k < run.gens.size(); ++k)
                    z[k] = z[k] - red.quotients[k];
                run.syzygies.push_back(std::move(z));
            }
            continue;
        }
        red.remainder.enforce_caps(caps);
        if (track) {
            std::vector<SparsePoly> row(inputs.size(), SparsePoly(mod));
            for (std::size_t j2 = 0; j2 < inputs.size(); ++j2) {
                row[j2] = run.rows[pr.i][j2].times_monomial(qi, ci) -
                          run.rows[pr.j][j2].times_monomial(qj, cj);
                for (std::size_t k = 0; k < run.gens.size(); ++k)
                    row[j2] = row[j2] - red.quotients[k] * run.rows[k][j2];
                row[j2].enforce_caps(caps);
            }
            run.rows.push_back(std::move(row));
        }
        run.gens.push_back(red.remainder);
        add_pairs_for(run.gens.size() - 1);
    }
    // pad recorded syzygies to the final basis length
    for (auto& z : run.syzygies) z.resize(run.gens.size(), SparsePoly(mod));
    return run;
}

} // namespace detail

inline GroebnerBasis buchberger(const std::vector<SparsePoly>& system, MonoOrder ord,
                                bool track_cofactors = false, const Caps& caps = Caps{}) {
    detail::BuchbergerRun run = detail::buchberger_run(system, ord, track_cofactors, caps);
    GroebnerBasis b;
    b.generators = std::move(run.gens);
    b.order = ord;
    b.cofactors = std::move(run.rows);
    b.n_inputs = system.size();
    return b;
}

// Post-hoc check: every S-polynomial of basis pairs reduces to zero.
inline bool is_groebner_basis(const GroebnerBasis& b, const Caps& caps = Caps{}) {
    if (b.generators.empty()) return true;
    const std::uint64_t mod = detail::common_modulus(b.generators);
    for (std::size_t i = 0; i < b.generators.size(); ++i) {
        for (std::size_t j = i + 1; j < b.generators.size(); ++j) {
            auto [lmi, lci] = b.generators[i].leading_term(b.order);
            auto [lmj, lcj] = b.generators[j].leading_term(b.order);
            Monomial l = mono_lcm(lmi, lmj);
            SparsePoly s =
                b.generators[i].times_monomial(mono_div(l, lmi).first, detail::field_inv(lci, mod)) -
                b.generators[j].times_monomial(mono_div(l, lmj).first, detail::field_inv(lcj, mod));
            if (!poly_divide(s, b.generators, b.order, caps).remainder.is_zero()) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- membership

struct MembershipResult {
    bool member = false;
    std::vector<SparsePoly> cofactors; // over the basis inputs, when tracked
};

inline MembershipResult ideal_membership(const SparsePoly& g, const GroebnerBasis& basis,
                                         const Caps& caps = Caps{}) {
    const std::uint64_t mod = detail::common_modulus(basis.generators);
    if (g.modulus() != mod) throw ModulusMismatch("membership query under different modulus");
    DivisionResult red = poly_divide(g, basis.generators, basis.order, caps);
    MembershipResult res;
    res.member = red.remainder.is_zero();
    if (res.member && !basis.cofactors.empty()) {
        res.cofactors.assign(basis.n_inputs, SparsePoly(mod));
        for (std::size_t k = 0; k < basis.generators.size(); ++k)
            for (std::size_t j = 0; j < basis.n_inputs; ++j)
                res.cofactors[j] = res.cofactors[j] + red.quotients[k] * basis.cofactors[k][j];
    }
    return res;
}

// Turn a positive membership answer into a placeholder-linear derivation
// certificate sum_j h_j * f_j for g and verify it before returning.
inline Certificate membership_certificate(const SparsePoly& g, const MembershipResult& res,
                                          const PolySystem& sys, const Caps& caps = Caps{}) {
    if (!res.member) throw InputError("membership_certificate requires a positive answer");
    if (res.cofactors.size() != sys.size())
        throw InputError("cofactor witness does not match the system (basis not tracked?)");
    SparsePoly body(g.modulus());
    for (std::size_t j = 0; j < res.cofactors.size(); ++j)
        body = body + res.cofactors[j] * SparsePoly::variable(VarId::F(static_cast<std::uint32_t>(j + 1)),
                                                              g.modulus());
    Certificate cert;
    cert.circuit = poly_to_circuit(body);
    cert.system = sys;
    cert.kind = CertKind::Derivation;
    cert.target = poly_to_circuit(g);
    if (!verify_exact(cert, caps).accepted)
        throw Error("internal error: membership witness failed certificate verification");
    return cert;
}

// g lies in the radical iff 1 lies in <system, 1 - t*g> for a fresh t.
inline bool radical_membership(const SparsePoly& g, const std::vector<SparsePoly>& system,
                               const Caps& caps = Caps{}) {
    const std::uint64_t mod = detail::common_modulus(system);
    if (g.modulus() != mod) throw ModulusMismatch("radical query under different modulus");
    std::uint32_t max_x = 0;
    auto scan = [&](const SparsePoly& p) {
        for (const auto& [m, c] : p.terms())
            for (const auto& [v, e] : m.exps)
                if (v.cls == VarId::Class::X) max_x = std::max(max_x, v.index);
    };
    scan(g);
    for (const auto& p : system) scan(p);
    SparsePoly t = SparsePoly::variable(VarId::X(max_x + 1), mod);
    std::vector<SparsePoly> aug = system;
    aug.push_back(SparsePoly::constant(1, mod) - t * g);
    GroebnerBasis b = buchberger(aug, MonoOrder::GrevLex, false, caps);
    for (const auto& p : b.generators)
        if (p.term_count() == 1 && p.terms().begin()->first.is_one()) return true;
    return false;
}

// ---------------------------------------------------------------- syzygies

namespace detail {

struct ModuleLT {
    std::size_t pos = 0;
    Monomial mono;
    Coef coef;
    bool valid = false;
};

// Term-over-position: compare leading monomials under the order, break ties
// toward the lower position.
inline ModuleLT module_lt(const ModuleElem& e, MonoOrder ord) {
    ModuleLT best;
    for (std::size_t p = 0; p < e.size(); ++p) {
        if (e[p].is_zero()) continue;
        auto [m, c] = e[p].leading_term(ord);
        if (!best.valid || mono_cmp(m, best.mono, ord) > 0) best = {p, m, c, true};
    }
    return best;
}

inline bool module_is_zero(const ModuleElem& e) {
    for (const auto& p : e)
        if (!p.is_zero()) return false;
    return true;
}

inline ModuleElem module_reduce(ModuleElem e, const std::vector<ModuleElem>& gens,
                                MonoOrder ord, std::uint64_t mod, const Caps& caps) {
    ModuleElem rest(e.size(), SparsePoly(mod));
    while (!module_is_zero(e)) {
        ModuleLT lt = module_lt(e, ord);
        bool reduced = false;
        for (const auto& g : gens) {
            ModuleLT glt = module_lt(g, ord);
            if (!glt.valid || glt.pos != lt.pos) continue;
            auto [q, ok] = mono_div(lt.mono, glt.mono);
            if (!ok) continue;
            Coef ratio = lt.coef * field_inv(glt.coef, mod);
            for (std::size_t p = 0; p < e.size(); ++p) {
                e[p] = e[p] - g[p].times_monomial(q, ratio);
                e[p].enforce_caps(caps);
            }
            reduced = true;
            break;
        }
        if (!reduced) {
            rest[lt.pos].add_term(lt.mono, lt.coef);
            SparsePoly single(mod);
            single.add_term(lt.mono, lt.coef);
            e[lt.pos] = e[lt.pos] - single;
        }
    }
    return rest;
}

inline std::vector<ModuleElem> module_buchberger(std::vector<ModuleElem> gens, MonoOrder ord,
                                                 std::uint64_t mod, const Caps& caps) {
    gens.erase(std::remove_if(gens.begin(), gens.end(), module_is_zero), gens.end());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            ModuleLT a = module_lt(gens[i], ord);
            ModuleLT b = module_lt(gens[j], ord);
            if (a.pos != b.pos) continue; // S-pairs only within one position
            Monomial l = mono_lcm(a.mono, b.mono);
            Monomial qa = mono_div(l, a.mono).first;
            Monomial qb = mono_div(l, b.mono).first;
            Coef ca = field_inv(a.coef, mod);
            Coef cb = field_inv(b.coef, mod);
            ModuleElem s(gens[i].size(), SparsePoly(mod));
            for (std::size_t p = 0; p < s.size(); ++p) {
                s[p] = gens[i][p].times_monomial(qa, ca) - gens[j][p].times_monomial(qb, cb);
                s[p].enforce_caps(caps);
            }
            ModuleElem r = module_reduce(std::move(s), gens, ord, mod, caps);
            if (!module_is_zero(r)) gens.push_back(std::move(r));
        }
    }
    return gens;
}

} // namespace detail

// First syzygies of the inputs: map the basis-level reduction syzygies back
// through the cofactor matrix, plus the residuals of re-expressing each input
// over the basis.
inline SyzygyGenerators syzygy_generators(const std::vector<SparsePoly>& system,
                                          MonoOrder ord = MonoOrder::GrevLex,
                                          const Caps& caps = Caps{}) {
    const std::uint64_t mod = detail::common_modulus(system);
    detail::BuchbergerRun run = detail::buchberger_run(system, ord, true, caps);
    SyzygyGenerators out;
    out.arity = system.size();

    auto push = [&](ModuleElem z) {
        if (detail::module_is_zero(z)) return;
        SparsePoly check(mod);
        for (std::size_t j = 0; j < system.size(); ++j) check = check + z[j] * system[j];
        if (!check.is_zero()) throw Error("internal error: candidate syzygy does not vanish");
        out.generators.push_back(std::move(z));
    };

    for (const auto& s : run.syzygies) {
        ModuleElem z(system.size(), SparsePoly(mod));
        for (std::size_t k = 0; k < run.gens.size(); ++k)
            for (std::size_t j = 0; j < system.size(); ++j)
                z[j] = z[j] + s[k] * run.rows[k][j];
        push(std::move(z));
    }
    for (std::size_t j = 0; j < system.size(); ++j) {
        if (system[j].is_zero()) continue;
        DivisionResult red = poly_divide(system[j], run.gens, ord, caps);
        if (!red.remainder.is_zero())
            throw Error("internal error: input does not reduce to zero modulo its own basis");
        ModuleElem z(system.size(), SparsePoly(mod));
        z[j].add_term(Monomial::one(), 1);
        for (std::size_t k = 0; k < run.gens.size(); ++k)
            for (std::size_t l = 0; l < system.size(); ++l)
                z[l] = z[l] - red.quotients[k] * run.rows[k][l];
        push(std::move(z));
    }
    return out;
}

// Membership of a tuple in the module spanned by the generators (used to
// check that the Koszul syzygies are covered).
inline bool in_syzygy_module(const ModuleElem& e, const SyzygyGenerators& gens,
                             MonoOrder ord = MonoOrder::GrevLex, const Caps& caps = Caps{}) {
    if (e.size() != gens.arity) throw InputError("tuple arity does not match the generators");
    std::uint64_t mod = 0;
    for (const auto& p : e)
        if (p.modulus() != 0) mod = p.modulus();
    if (mod == 0) throw UnsupportedModulus("module reduction requires a prime modulus");
    std::vector<ModuleElem> basis =
        detail::module_buchberger(gens.generators, ord, mod, caps);
    return detail::module_is_zero(detail::module_reduce(e, basis, ord, mod, caps));
}

// ---------------------------------------------------------------- geometry

// Basis of the f-only relations among the system polynomials: eliminate x
// from <f_i - F_i(x)>. Every returned C satisfies C(F_1,...,F_m) = 0.
inline GroebnerBasis geometric_zero_certificates(const PolySystem& sys,
                                                 const Caps& caps = Caps{}) {
    if (sys.modulus == 0)
        throw UnsupportedModulus("elimination requires a prime modulus");
    std::vector<SparsePoly> gens;
    for (std::size_t j = 0; j < sys.size(); ++j) {
        SparsePoly fj = SparsePoly::variable(VarId::F(static_cast<std::uint32_t>(j + 1)), sys.modulus);
        gens.push_back(fj - expand_circuit(sys.equations[j], caps, sys.modulus));
    }
    GroebnerBasis full = buchberger(gens, MonoOrder::ElimX, false, caps);
    GroebnerBasis out;
    out.order = MonoOrder::ElimX;
    out.n_inputs = sys.size();
    for (const auto& p : full.generators) {
        bool f_only = true;
        for (const auto& [m, c] : p.terms())
            for (const auto& [v, e] : m.exps)
                if (v.cls != VarId::Class::F) f_only = false;
        if (f_only) out.generators.push_back(p);
    }
    return out;
}

// A relation C with C(0) = 1 and C(F(x)) = 0, when one exists. Any ideal
// combination has constant term equal to a combination of the generators'
// constant terms, so scanning the basis for a nonzero constant term decides
// existence; the hit is normalized to value 1 at the origin.
inline std::optional<SparsePoly> geometric_certificate(const PolySystem& sys,
                                                       const Caps& caps = Caps{}) {
    GroebnerBasis elim = geometric_zero_certificates(sys, caps);
    for (const auto& p : elim.generators) {
        Coef c0 = p.constant_term();
        if (c0 != 0) return p.scaled(detail::field_inv(c0, sys.modulus));
    }
    return std::nullopt;
}

// 1 - C is a refutation certificate in the f-variables alone.
inline std::optional<Certificate> geometric_refutation(const PolySystem& sys,
                                                       const Caps& caps = Caps{}) {
    std::optional<SparsePoly> c = geometric_certificate(sys, caps);
    if (!c) return std::nullopt;
    Certificate cert;
    cert.circuit = poly_to_circuit(SparsePoly::constant(1, sys.modulus) - *c);
    cert.system = sys;
    cert.kind = CertKind::Refutation;
    if (!verify_exact(cert, caps).accepted)
        throw Error("internal error: geometric certificate failed verification");
    return cert;
}

} // namespace ipskit
