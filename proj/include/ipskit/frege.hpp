#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ipskit/circuit_io.hpp"
#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/ips.hpp"

namespace ipskit {

// ---------------------------------------------------------------- formulas

// {not, unbounded or, unbounded xor} formulas; `and` appears only in the
// propositional encodings, never in sequent proofs.
struct BoolFormula {
    enum class Kind : std::uint8_t { Var, Not, Or, Xor, And };
    Kind kind = Kind::Var;
    std::uint32_t var = 0; // 1-based, Kind::Var only
    std::vector<BoolFormula> children;

    static BoolFormula mkvar(std::uint32_t i) {
        BoolFormula f;
        f.kind = Kind::Var;
        f.var = i;
        return f;
    }
    static BoolFormula mknot(BoolFormula a) {
        BoolFormula f;
        f.kind = Kind::Not;
        f.children.push_back(std::move(a));
        return f;
    }
    static BoolFormula mkor(std::vector<BoolFormula> cs) {
        BoolFormula f;
        f.kind = Kind::Or;
        f.children = std::move(cs);
        return f;
    }
    static BoolFormula mkxor(std::vector<BoolFormula> cs) {
        BoolFormula f;
        f.kind = Kind::Xor;
        f.children = std::move(cs);
        return f;
    }
    static BoolFormula mkand(std::vector<BoolFormula> cs) {
        BoolFormula f;
        f.kind = Kind::And;
        f.children = std::move(cs);
        return f;
    }

    friend bool operator==(const BoolFormula& a, const BoolFormula& b) {
        if (a.kind != b.kind || a.var != b.var) return false;
        return a.children == b.children;
    }
    friend bool operator!=(const BoolFormula& a, const BoolFormula& b) { return !(a == b); }
};

// Every or/xor node contributes one to the depth; negation is free.
inline std::uint32_t formula_depth(const BoolFormula& f) {
    std::uint32_t d = 0;
    for (const BoolFormula& c : f.children) d = std::max(d, formula_depth(c));
    if (f.kind == BoolFormula::Kind::Or || f.kind == BoolFormula::Kind::Xor ||
        f.kind == BoolFormula::Kind::And)
        return d + 1;
    return d;
}

inline bool formula_evaluate(const BoolFormula& f, std::uint32_t assignment_mask) {
    switch (f.kind) {
    case BoolFormula::Kind::Var:
        return (assignment_mask >> (f.var - 1)) & 1u;
    case BoolFormula::Kind::Not:
        return !formula_evaluate(f.children[0], assignment_mask);
    case BoolFormula::Kind::Or: {
        for (const auto& c : f.children)
            if (formula_evaluate(c, assignment_mask)) return true;
        return false;
    }
    case BoolFormula::Kind::Xor: {
        bool v = false;
        for (const auto& c : f.children) v ^= formula_evaluate(c, assignment_mask);
        return v;
    }
    case BoolFormula::Kind::And: {
        for (const auto& c : f.children)
            if (!formula_evaluate(c, assignment_mask)) return false;
        return true;
    }
    }
    return false;
}

// ---------------------------------------------------------------- translation

namespace detail {

inline std::uint32_t translate_into(Circuit& c, const BoolFormula& f, std::uint32_t& one,
                                    bool& have_one) {
    auto need_one = [&]() {
        if (!have_one) { one = c.add_const(1); have_one = true; }
        return one;
    };
    switch (f.kind) {
    case BoolFormula::Kind::Var:
        return c.add_lin({1, -1}, {need_one(), c.add_var(VarId::X(f.var))});
    case BoolFormula::Kind::Not:
        return c.add_lin({1, -1}, {need_one(), translate_into(c, f.children[0], one, have_one)});
    case BoolFormula::Kind::Or: {
        if (f.children.empty()) return need_one();
        std::vector<std::uint32_t> factors;
        for (const auto& ch : f.children) factors.push_back(translate_into(c, ch, one, have_one));
        if (factors.size() == 1) return factors[0];
        return c.add_prod(std::move(factors));
    }
    case BoolFormula::Kind::Xor: {
        // 1 is false, 0 is true under t, so the constant is n+1 (mod 2),
        // making t(xor()) = 1: the empty parity is false.
        std::vector<std::int64_t> coeffs;
        std::vector<std::uint32_t> kids;
        if ((f.children.size() + 1) % 2 == 1) {
            coeffs.push_back(1);
            kids.push_back(need_one());
        }
        for (const auto& ch : f.children) {
            coeffs.push_back(1);
            kids.push_back(translate_into(c, ch, one, have_one));
        }
        if (kids.empty()) return c.add_const(0);
        return c.add_lin(std::move(coeffs), std::move(kids));
    }
    case BoolFormula::Kind::And:
        throw InputError("conjunctions are not part of the sequent fragment");
    }
    throw InputError("unreachable formula kind");
}

} // namespace detail

// t(A): vanishes exactly where A is true, over F_2.
inline Circuit translate_formula(const BoolFormula& f) {
    Circuit c;
    std::uint32_t one = 0;
    bool have_one = false;
    c.outputs = {detail::translate_into(c, f, one, have_one)};
    return c;
}

// ---------------------------------------------------------------- cedents

struct Justification {
    enum class Rule : std::uint8_t {
        AxiomAA,
        AxiomFalseOr,
        AxiomNotXorEmpty,
        InitialClause,
        WeakL,
        WeakR,
        Cut,
        NegL,
        NegR,
        OrL,
        OrR,
        XorL,
        XorR
    };
    Rule rule = Rule::AxiomAA;
    std::uint32_t clause = 0;                     // InitialClause, 1-based
    std::uint32_t p1 = 0, p2 = 0;                 // 0-based premise indices
};

struct Cedent {
    std::vector<BoolFormula> ants, sucs;
    Justification by;
};

struct FregeRefutation {
    CnfFormula cnf;
    std::vector<Cedent> cedents;
    std::string cnf_path; // optional provenance for serialized proofs
};

struct FregeCheck {
    std::uint32_t depth = 0;
    std::size_t cedents = 0;
};

// The formula a clause contributes as an initial cedent: a bare literal for
// width one, otherwise the or of its literals in file order.
inline BoolFormula clause_formula(const std::vector<std::int32_t>& clause) {
    std::vector<BoolFormula> lits;
    for (std::int32_t lit : clause) {
        BoolFormula v = BoolFormula::mkvar(static_cast<std::uint32_t>(lit > 0 ? lit : -lit));
        lits.push_back(lit > 0 ? v : BoolFormula::mknot(v));
    }
    if (lits.size() == 1) return lits[0];
    return BoolFormula::mkor(std::move(lits));
}

namespace detail {

// position whose deletion from `longer` yields `shorter`, if any
inline std::optional<std::size_t> deleted_position(const std::vector<BoolFormula>& longer,
                                                   const std::vector<BoolFormula>& shorter) {
    if (longer.size() != shorter.size() + 1) return std::nullopt;
    for (std::size_t k = 0; k < longer.size(); ++k) {
        bool ok = true;
        for (std::size_t i = 0; i < shorter.size(); ++i) {
            if (shorter[i] != longer[i < k ? i : i + 1]) { ok = false; break; }
        }
        if (ok) return k;
    }
    return std::nullopt;
}

inline std::vector<BoolFormula> drop_front(const std::vector<BoolFormula>& v, std::size_t n = 1) {
    return {v.begin() + static_cast<std::ptrdiff_t>(n), v.end()};
}

[[noreturn]] inline void rule_fail(std::size_t idx, const std::string& why) {
    throw RuleMismatch("cedent " + std::to_string(idx + 1) + ": " + why);
}

inline void check_cedent(const FregeRefutation& ref, std::size_t k) {
    const Cedent& c = ref.cedents[k];
    const Justification& j = c.by;
    auto premise = [&](std::uint32_t p) -> const Cedent& {
        if (p >= k) rule_fail(k, "premise must be strictly earlier");
        return ref.cedents[p];
    };
    using R = Justification::Rule;
    switch (j.rule) {
    case R::AxiomAA:
        if (c.ants.size() != 1 || c.sucs.size() != 1 || c.ants[0] != c.sucs[0])
            rule_fail(k, "identity axiom must be A -> A");
        break;
    case R::AxiomFalseOr:
        if (c.ants.size() != 1 || !c.sucs.empty() || c.ants[0] != BoolFormula::mkor({}))
            rule_fail(k, "axiom must be or() ->");
        break;
    case R::AxiomNotXorEmpty:
        if (!c.ants.empty() || c.sucs.size() != 1 ||
            c.sucs[0] != BoolFormula::mknot(BoolFormula::mkxor({})))
            rule_fail(k, "axiom must be -> not(xor())");
        break;
    case R::InitialClause: {
        if (j.clause == 0 || j.clause > ref.cnf.clauses.size())
            rule_fail(k, "clause index out of range");
        if (!c.ants.empty() || c.sucs.size() != 1 ||
            c.sucs[0] != clause_formula(ref.cnf.clauses[j.clause - 1]))
            rule_fail(k, "cedent must be -> (clause formula)");
        break;
    }
    case R::WeakL: {
        const Cedent& p = premise(j.p1);
        if (c.sucs != p.sucs || !deleted_position(c.ants, p.ants))
            rule_fail(k, "left weakening must add one antecedent");
        break;
    }
    case R::WeakR: {
        const Cedent& p = premise(j.p1);
        if (c.ants != p.ants || !deleted_position(c.sucs, p.sucs))
            rule_fail(k, "right weakening must add one succedent");
        break;
    }
    case R::Cut: {
        const Cedent& a = premise(j.p1);
        const Cedent& b = premise(j.p2);
        if (!c.ants.empty() || !a.ants.empty() || !b.ants.empty())
            rule_fail(k, "cut operates on right-sided cedents");
        if (a.sucs.size() != c.sucs.size() + 1 || b.sucs.size() != c.sucs.size() + 1)
            rule_fail(k, "cut premises must extend the conclusion by the cut formula");
        if (b.sucs[0] != BoolFormula::mknot(a.sucs[0]))
            rule_fail(k, "second premise must start with the negated cut formula");
        if (drop_front(a.sucs) != c.sucs || drop_front(b.sucs) != c.sucs)
            rule_fail(k, "cut context mismatch");
        break;
    }
    case R::NegL: {
        const Cedent& p = premise(j.p1);
        if (c.ants.empty() || p.sucs.empty())
            rule_fail(k, "left negation needs a new antecedent and a premise succedent");
        if (c.ants.back() != BoolFormula::mknot(p.sucs[0]))
            rule_fail(k, "new antecedent must negate the premise's first succedent");
        if (std::vector<BoolFormula>(c.ants.begin(), c.ants.end() - 1) != p.ants ||
            c.sucs != drop_front(p.sucs))
            rule_fail(k, "left negation context mismatch");
        break;
    }
    case R::NegR: {
        const Cedent& p = premise(j.p1);
        if (c.sucs.empty() || p.ants.empty())
            rule_fail(k, "right negation needs a new succedent and a premise antecedent");
        if (c.sucs[0] != BoolFormula::mknot(p.ants.back()))
            rule_fail(k, "new succedent must negate the premise's last antecedent");
        if (std::vector<BoolFormula>(p.ants.begin(), p.ants.end() - 1) != c.ants ||
            drop_front(c.sucs) != p.sucs)
            rule_fail(k, "right negation context mismatch");
        break;
    }
    case R::OrL: {
        const Cedent& a = premise(j.p1);
        const Cedent& b = premise(j.p2);
        if (c.ants.empty() || c.ants[0].kind != BoolFormula::Kind::Or ||
            c.ants[0].children.empty())
            rule_fail(k, "conclusion must start with a nonempty disjunction");
        const auto& kids = c.ants[0].children;
        BoolFormula rest = BoolFormula::mkor({kids.begin() + 1, kids.end()});
        if (a.ants.empty() || a.ants[0] != kids[0] || drop_front(a.ants) != drop_front(c.ants) ||
            a.sucs != c.sucs)
            rule_fail(k, "first premise must start with the head disjunct");
        if (b.ants.empty() || b.ants[0] != rest || drop_front(b.ants) != drop_front(c.ants) ||
            b.sucs != c.sucs)
            rule_fail(k, "second premise must start with the tail disjunction");
        break;
    }
    case R::OrR: {
        const Cedent& p = premise(j.p1);
        if (c.sucs.empty() || c.sucs[0].kind != BoolFormula::Kind::Or ||
            c.sucs[0].children.empty())
            rule_fail(k, "conclusion must start with a nonempty disjunction");
        const auto& kids = c.sucs[0].children;
        BoolFormula rest = BoolFormula::mkor({kids.begin() + 1, kids.end()});
        if (p.ants != c.ants || p.sucs.size() != c.sucs.size() + 1 || p.sucs[0] != kids[0] ||
            p.sucs[1] != rest || drop_front(p.sucs, 2) != drop_front(c.sucs))
            rule_fail(k, "premise must split the head disjunct off");
        break;
    }
    case R::XorL: {
        const Cedent& a = premise(j.p1);
        const Cedent& b = premise(j.p2);
        if (c.ants.empty() || c.ants[0].kind != BoolFormula::Kind::Xor ||
            c.ants[0].children.empty())
            rule_fail(k, "conclusion must start with a nonempty parity");
        const auto& kids = c.ants[0].children;
        BoolFormula rest = BoolFormula::mkxor({kids.begin() + 1, kids.end()});
        if (a.ants.size() < 2 || a.ants[0] != kids[0] ||
            a.ants[1] != BoolFormula::mknot(rest) || drop_front(a.ants, 2) != drop_front(c.ants) ||
            a.sucs != c.sucs)
            rule_fail(k, "first premise must be A1, not(parity rest), ...");
        if (b.ants.empty() || b.ants[0] != rest || drop_front(b.ants) != drop_front(c.ants) ||
            b.sucs.empty() || b.sucs[0] != kids[0] || drop_front(b.sucs) != c.sucs)
            rule_fail(k, "second premise must be parity rest, ... -> A1, ...");
        break;
    }
    case R::XorR: {
        const Cedent& a = premise(j.p1);
        const Cedent& b = premise(j.p2);
        if (c.sucs.empty() || c.sucs[0].kind != BoolFormula::Kind::Xor ||
            c.sucs[0].children.empty())
            rule_fail(k, "conclusion must start with a nonempty parity");
        const auto& kids = c.sucs[0].children;
        BoolFormula rest = BoolFormula::mkxor({kids.begin() + 1, kids.end()});
        if (a.ants.empty() || a.ants[0] != kids[0] || drop_front(a.ants) != c.ants ||
            a.sucs.empty() || a.sucs[0] != BoolFormula::mknot(rest) ||
            drop_front(a.sucs) != drop_front(c.sucs))
            rule_fail(k, "first premise must be A1, ... -> not(parity rest), ...");
        if (b.ants != c.ants || b.sucs.size() < 2 || b.sucs[0] != kids[0] || b.sucs[1] != rest ||
            drop_front(b.sucs, 2) != drop_front(c.sucs))
            rule_fail(k, "second premise must be ... -> A1, parity rest, ...");
        break;
    }
    }
}

inline bool has_two_premises(Justification::Rule r) {
    using R = Justification::Rule;
    return r == R::Cut || r == R::OrL || r == R::XorL || r == R::XorR;
}

inline bool has_one_premise(Justification::Rule r) {
    using R = Justification::Rule;
    return r == R::WeakL || r == R::WeakR || r == R::NegL || r == R::NegR || r == R::OrR;
}

} // namespace detail

inline FregeCheck check_frege(const FregeRefutation& ref) {
    if (ref.cedents.empty()) throw RuleMismatch("empty refutation");
    std::vector<std::uint32_t> uses(ref.cedents.size(), 0);
    FregeCheck out;
    out.cedents = ref.cedents.size();
    for (std::size_t k = 0; k < ref.cedents.size(); ++k) {
        const Cedent& c = ref.cedents[k];
        detail::check_cedent(ref, k);
        if (detail::has_one_premise(c.by.rule) || detail::has_two_premises(c.by.rule))
            ++uses[c.by.p1];
        if (detail::has_two_premises(c.by.rule)) ++uses[c.by.p2];
        for (const BoolFormula& f : c.ants) out.depth = std::max(out.depth, formula_depth(f));
        for (const BoolFormula& f : c.sucs) out.depth = std::max(out.depth, formula_depth(f));
    }
    const Cedent& last = ref.cedents.back();
    if (!last.ants.empty() || !last.sucs.empty())
        throw RuleMismatch("final cedent must be empty");
    for (std::size_t k = 0; k + 1 < ref.cedents.size(); ++k)
        if (uses[k] != 1)
            throw NotTreeLike("cedent " + std::to_string(k + 1) + " used " +
                              std::to_string(uses[k]) + " times; tree form requires exactly one");
    if (uses.back() != 0) throw NotTreeLike("final cedent cannot be a premise");
    return out;
}

// ---------------------------------------------------------------- compilation

// Terms G_i * f_i kept as factor lists so every coefficient keeps a product
// gate at its root until the final gathering step.
struct FregeTerm {
    std::vector<Circuit> factors;
    std::uint32_t f = 0; // 1-based placeholder index
};

// t(cedent): everything moved to the right, so (1 - t(A)) per antecedent and
// t(B) per succedent, multiplied out.
inline Circuit cedent_translation(const Cedent& c) {
    Circuit out;
    std::vector<std::uint32_t> factors;
    for (const BoolFormula& a : c.ants)
        factors.push_back(detail::append_circuit(out, translate_formula(BoolFormula::mknot(a))));
    for (const BoolFormula& b : c.sucs)
        factors.push_back(detail::append_circuit(out, translate_formula(b)));
    if (factors.empty()) out.outputs = {out.add_const(1)};
    else if (factors.size() == 1) out.outputs = {factors[0]};
    else out.outputs = {out.add_prod(std::move(factors))};
    return out;
}

namespace detail {

// Terms deriving t(A) - t(A)^2 (= t(A)(1 - t(A)) over F_2) from the
// Boolean-axiom placeholders f_{m+1}..f_{m+n}.
inline std::vector<FregeTerm> square_diff_terms(const BoolFormula& a, std::size_t m) {
    using K = BoolFormula::Kind;
    switch (a.kind) {
    case K::Var: {
        FregeTerm t;
        t.f = static_cast<std::uint32_t>(m) + a.var;
        return {t};
    }
    case K::Not:
        return square_diff_terms(a.children[0], m);
    case K::Xor: {
        std::vector<FregeTerm> out;
        for (const auto& ch : a.children) {
            auto sub = square_diff_terms(ch, m);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    case K::Or: {
        // P(1-P) for P = prod t_i decomposes as
        //   sum_i (t_i - t_i^2) * prod_{j<i} t_j^2 * prod_{k>i} t_k
        std::vector<FregeTerm> out;
        for (std::size_t i = 0; i < a.children.size(); ++i) {
            auto sub = square_diff_terms(a.children[i], m);
            for (FregeTerm& t : sub) {
                for (std::size_t j = 0; j < i; ++j) {
                    Circuit tj = translate_formula(a.children[j]);
                    t.factors.push_back(tj);
                    t.factors.push_back(tj);
                }
                for (std::size_t k = i + 1; k < a.children.size(); ++k)
                    t.factors.push_back(translate_formula(a.children[k]));
                out.push_back(std::move(t));
            }
        }
        return out;
    }
    case K::And:
        throw InputError("conjunctions are not part of the sequent fragment");
    }
    throw InputError("unreachable formula kind");
}

inline void multiply_all(std::vector<FregeTerm>& terms, const Circuit& factor) {
    for (FregeTerm& t : terms) t.factors.push_back(factor);
}

} // namespace detail

// Gathers a term list into one circuit: a sum of products G_i * f_i.
inline Circuit gather_terms(const std::vector<FregeTerm>& terms) {
    Circuit c;
    if (terms.empty()) {
        c.outputs = {c.add_const(0)};
        return c;
    }
    std::vector<std::int64_t> coeffs;
    std::vector<std::uint32_t> sums;
    for (const FregeTerm& t : terms) {
        std::vector<std::uint32_t> factors;
        for (const Circuit& f : t.factors) factors.push_back(detail::append_circuit(c, f));
        factors.push_back(c.add_var(VarId::F(t.f)));
        coeffs.push_back(1);
        sums.push_back(c.add_prod(std::move(factors)));
    }
    c.outputs = {c.add_lin(std::move(coeffs), std::move(sums))};
    return c;
}

// Per-cedent term lists of the simulation; entry k derives t(cedent k).
inline std::vector<std::vector<FregeTerm>> compile_frege_terms(const FregeRefutation& ref) {
    check_frege(ref);
    const std::size_t m = ref.cnf.clauses.size();
    std::vector<std::vector<FregeTerm>> lists(ref.cedents.size());
    using R = Justification::Rule;
    for (std::size_t k = 0; k < ref.cedents.size(); ++k) {
        const Cedent& c = ref.cedents[k];
        const Justification& j = c.by;
        std::vector<FregeTerm>& out = lists[k];
        switch (j.rule) {
        case R::AxiomFalseOr:
        case R::AxiomNotXorEmpty:
            break; // both translate to the zero polynomial
        case R::AxiomAA:
            out = detail::square_diff_terms(c.ants[0], m);
            break;
        case R::InitialClause: {
            FregeTerm t;
            t.f = j.clause;
            out = {t};
            break;
        }
        case R::WeakL: {
            out = lists[j.p1];
            std::size_t pos = *detail::deleted_position(c.ants, ref.cedents[j.p1].ants);
            detail::multiply_all(out, translate_formula(BoolFormula::mknot(c.ants[pos])));
            break;
        }
        case R::WeakR: {
            out = lists[j.p1];
            std::size_t pos = *detail::deleted_position(c.sucs, ref.cedents[j.p1].sucs);
            detail::multiply_all(out, translate_formula(c.sucs[pos]));
            break;
        }
        case R::Cut:
        case R::XorL:
        case R::XorR:
            out = lists[j.p1];
            out.insert(out.end(), lists[j.p2].begin(), lists[j.p2].end());
            break;
        case R::NegL:
        case R::NegR:
        case R::OrR:
            out = lists[j.p1]; // translations are syntactically identical
            break;
        case R::OrL: {
            out = lists[j.p1];
            std::vector<FregeTerm> scaled = lists[j.p2];
            detail::multiply_all(scaled, translate_formula(c.ants[0].children[0]));
            out.insert(out.end(), scaled.begin(), scaled.end());
            break;
        }
        }
    }
    return lists;
}

inline Certificate compile_frege_to_ips(const FregeRefutation& ref, std::uint64_t modulus = 2) {
    if (modulus != 2) throw UnsupportedModulus("the sequent compilation works over F_2 only");
    std::vector<std::vector<FregeTerm>> lists = compile_frege_terms(ref);
    Certificate cert;
    cert.circuit = gather_terms(lists.back());
    cert.circuit.declared_xvars = ref.cnf.n_vars;
    cert.system = translate(ref.cnf, true, 2);
    cert.kind = CertKind::Refutation;
    return cert;
}

// ---------------------------------------------------------------- text format

namespace detail {

inline void write_formula_sexpr(std::ostream& os, const BoolFormula& f) {
    switch (f.kind) {
    case BoolFormula::Kind::Var:
        os << "x" << f.var;
        return;
    case BoolFormula::Kind::Not:
        os << "(not ";
        write_formula_sexpr(os, f.children[0]);
        os << ")";
        return;
    default: {
        const char* head = f.kind == BoolFormula::Kind::Or    ? "or"
                           : f.kind == BoolFormula::Kind::Xor ? "xor"
                                                              : "and";
        os << "(" << head;
        for (const auto& ch : f.children) {
            os << " ";
            write_formula_sexpr(os, ch);
        }
        os << ")";
        return;
    }
    }
}

inline std::vector<std::string> sexpr_tokens(std::istream& in) {
    std::vector<std::string> toks;
    std::string cur;
    char ch;
    bool comment = false;
    while (in.get(ch)) {
        if (comment) {
            if (ch == '\n') comment = false;
            continue;
        }
        if (ch == ';') {
            comment = true;
            ch = ' ';
        }
        if (ch == '(' || ch == ')') {
            if (!cur.empty()) { toks.push_back(cur); cur.clear(); }
            toks.push_back(std::string(1, ch));
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) { toks.push_back(cur); cur.clear(); }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) toks.push_back(cur);
    return toks;
}

inline BoolFormula parse_formula_tokens(const std::vector<std::string>& toks, std::size_t& i) {
    if (i >= toks.size()) throw ParseError("unexpected end of formula");
    const std::string& t = toks[i];
    if (t != "(") {
        ++i;
        if (t.size() < 2 || t[0] != 'x') throw ParseError("expected a variable, got " + t);
        std::uint32_t v = static_cast<std::uint32_t>(std::stoul(t.substr(1)));
        if (v == 0) throw ParseError("variable indices are 1-based");
        return BoolFormula::mkvar(v);
    }
    ++i; // '('
    if (i >= toks.size()) throw ParseError("unterminated formula");
    std::string head = toks[i++];
    std::vector<BoolFormula> kids;
    while (i < toks.size() && toks[i] != ")") kids.push_back(parse_formula_tokens(toks, i));
    if (i >= toks.size()) throw ParseError("unterminated formula");
    ++i; // ')'
    if (head == "not") {
        if (kids.size() != 1) throw ParseError("not takes exactly one argument");
        return BoolFormula::mknot(std::move(kids[0]));
    }
    if (head == "or") return BoolFormula::mkor(std::move(kids));
    if (head == "xor") return BoolFormula::mkxor(std::move(kids));
    if (head == "and") return BoolFormula::mkand(std::move(kids));
    throw ParseError("unknown connective: " + head);
}

inline const char* rule_name(Justification::Rule r) {
    using R = Justification::Rule;
    switch (r) {
    case R::AxiomAA: return "axiom-aa";
    case R::AxiomFalseOr: return "axiom-false-or";
    case R::AxiomNotXorEmpty: return "axiom-not-xor-empty";
    case R::InitialClause: return "clause";
    case R::WeakL: return "weak-l";
    case R::WeakR: return "weak-r";
    case R::Cut: return "cut";
    case R::NegL: return "neg-l";
    case R::NegR: return "neg-r";
    case R::OrL: return "or-l";
    case R::OrR: return "or-r";
    case R::XorL: return "xor-l";
    case R::XorR: return "xor-r";
    }
    return "?";
}

} // namespace detail

inline std::string formula_to_string(const BoolFormula& f) {
    std::ostringstream os;
    detail::write_formula_sexpr(os, f);
    return os.str();
}

inline BoolFormula parse_formula(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> toks = detail::sexpr_tokens(in);
    std::size_t i = 0;
    BoolFormula f = detail::parse_formula_tokens(toks, i);
    if (i != toks.size()) throw ParseError("trailing tokens after formula");
    return f;
}

inline void write_fregeproof(std::ostream& os, const FregeRefutation& ref) {
    os << "fregeproof v1\n";
    if (!ref.cnf_path.empty()) os << "cnf " << ref.cnf_path << "\n";
    os << "modp 2\n";
    using R = Justification::Rule;
    for (const Cedent& c : ref.cedents) {
        os << "(cedent (ants";
        for (const auto& f : c.ants) {
            os << " ";
            detail::write_formula_sexpr(os, f);
        }
        os << ") (sucs";
        for (const auto& f : c.sucs) {
            os << " ";
            detail::write_formula_sexpr(os, f);
        }
        os << ") (by " << detail::rule_name(c.by.rule);
        if (c.by.rule == R::InitialClause) os << " " << c.by.clause;
        else if (detail::has_one_premise(c.by.rule)) os << " " << (c.by.p1 + 1);
        else if (detail::has_two_premises(c.by.rule))
            os << " " << (c.by.p1 + 1) << " " << (c.by.p2 + 1);
        os << "))\n";
    }
}

inline std::string fregeproof_to_string(const FregeRefutation& ref) {
    std::ostringstream os;
    write_fregeproof(os, ref);
    return os.str();
}

// Parses a proof file; the CNF itself is not stored in the file, so the
// caller supplies it (or fills it from the recorded path).
inline FregeRefutation parse_fregeproof(std::istream& in, CnfFormula cnf = {}) {
    FregeRefutation ref;
    ref.cnf = std::move(cnf);
    std::string line;
    if (!std::getline(in, line) || detail::strip_comment(line) != "fregeproof v1")
        throw MalformedHeader("expected 'fregeproof v1'");
    std::streampos body = in.tellg();
    bool saw_modp = false;
    while (std::getline(in, line)) {
        std::string s = detail::strip_comment(line);
        if (s.empty()) { body = in.tellg(); continue; }
        std::istringstream ls(s);
        std::string key;
        ls >> key;
        if (key == "cnf") {
            ls >> ref.cnf_path;
            body = in.tellg();
        } else if (key == "modp") {
            std::uint64_t p = 0;
            ls >> p;
            if (p != 2) throw UnsupportedModulus("only modp 2 proofs are supported");
            saw_modp = true;
            body = in.tellg();
        } else {
            break; // start of the cedent s-expressions
        }
    }
    if (!saw_modp) throw MalformedHeader("missing modp header");
    in.clear();
    in.seekg(body);
    std::vector<std::string> toks = detail::sexpr_tokens(in);
    std::size_t i = 0;
    using R = Justification::Rule;
    auto expect = [&](const std::string& want) {
        if (i >= toks.size() || toks[i] != want)
            throw ParseError("expected '" + want + "' in cedent");
        ++i;
    };
    while (i < toks.size()) {
        expect("(");
        expect("cedent");
        Cedent c;
        expect("(");
        expect("ants");
        while (i < toks.size() && toks[i] != ")") c.ants.push_back(detail::parse_formula_tokens(toks, i));
        expect(")");
        expect("(");
        expect("sucs");
        while (i < toks.size() && toks[i] != ")") c.sucs.push_back(detail::parse_formula_tokens(toks, i));
        expect(")");
        expect("(");
        expect("by");
        if (i >= toks.size()) throw ParseError("missing rule name");
        std::string name = toks[i++];
        bool known = false;
        for (int r = 0; r <= static_cast<int>(R::XorR); ++r) {
            if (name == detail::rule_name(static_cast<R>(r))) {
                c.by.rule = static_cast<R>(r);
                known = true;
                break;
            }
        }
        if (!known) throw ParseError("unknown rule: " + name);
        auto read_ref = [&]() {
            if (i >= toks.size() || toks[i] == ")") throw ParseError("missing rule argument");
            std::uint32_t v = static_cast<std::uint32_t>(std::stoul(toks[i++]));
            if (v == 0 || v > ref.cedents.size())
                throw ParseError("cedent reference out of range: " + std::to_string(v));
            return v - 1;
        };
        if (c.by.rule == R::InitialClause) {
            if (i >= toks.size() || toks[i] == ")") throw ParseError("missing clause index");
            c.by.clause = static_cast<std::uint32_t>(std::stoul(toks[i++]));
        } else if (detail::has_one_premise(c.by.rule)) {
            c.by.p1 = read_ref();
        } else if (detail::has_two_premises(c.by.rule)) {
            c.by.p1 = read_ref();
            c.by.p2 = read_ref();
        }
        expect(")");
        expect(")");
        ref.cedents.push_back(std::move(c));
    }
    return ref;
}

inline FregeRefutation parse_fregeproof(const std::string& text, CnfFormula cnf = {}) {
    std::istringstream in(text);
    return parse_fregeproof(in, std::move(cnf));
}

// ---------------------------------------------------------------- generators

// Depth-d refutation of (x1) and (~x1) that routes the contradiction through
// a d-deep tower of unary disjunctions, exercising or-left, or-right, both
// negation rules, weakening, and cut.
inline FregeRefutation or_tower_refutation(std::uint32_t d) {
    if (d == 0) throw InputError("tower depth must be at least 1");
    FregeRefutation ref;
    ref.cnf.n_vars = 1;
    ref.cnf.clauses = {{1}, {-1}};
    auto add = [&](Cedent c) {
        ref.cedents.push_back(std::move(c));
        return static_cast<std::uint32_t>(ref.cedents.size() - 1);
    };
    using R = Justification::Rule;
    BoolFormula x1 = BoolFormula::mkvar(1);
    BoolFormula nx1 = BoolFormula::mknot(x1);

    // left tower: [or^j(~x1)] ->
    Cedent init1;
    init1.sucs = {x1};
    init1.by.rule = R::InitialClause;
    init1.by.clause = 1;
    std::uint32_t cur = add(init1);
    Cedent neg;
    neg.ants = {nx1};
    neg.by.rule = R::NegL;
    neg.by.p1 = cur;
    cur = add(neg);
    BoolFormula w = nx1;
    for (std::uint32_t j = 0; j < d; ++j) {
        Cedent falseor;
        falseor.ants = {BoolFormula::mkor({})};
        falseor.by.rule = R::AxiomFalseOr;
        std::uint32_t ax = add(falseor);
        w = BoolFormula::mkor({w});
        Cedent orl;
        orl.ants = {w};
        orl.by.rule = R::OrL;
        orl.by.p1 = cur;
        orl.by.p2 = ax;
        cur = add(orl);
    }
    Cedent negr;
    negr.sucs = {BoolFormula::mknot(w)};
    negr.by.rule = R::NegR;
    negr.by.p1 = cur;
    std::uint32_t left = add(negr);

    // right tower: -> or^j(~x1)
    Cedent init2;
    init2.sucs = {nx1};
    init2.by.rule = R::InitialClause;
    init2.by.clause = 2;
    cur = add(init2);
    BoolFormula v = nx1;
    for (std::uint32_t j = 0; j < d; ++j) {
        Cedent weak;
        weak.sucs = {v, BoolFormula::mkor({})};
        weak.by.rule = R::WeakR;
        weak.by.p1 = cur;
        std::uint32_t wk = add(weak);
        v = BoolFormula::mkor({v});
        Cedent orr;
        orr.sucs = {v};
        orr.by.rule = R::OrR;
        orr.by.p1 = wk;
        cur = add(orr);
    }

    Cedent cut;
    cut.by.rule = R::Cut;
    cut.by.p1 = cur;  // -> w
    cut.by.p2 = left; // -> not(w)
    add(cut);
    return ref;
}

// Refutation of the same formula that cuts on xor(~x1), exercising both
// parity rules and the empty-parity axiom.
inline FregeRefutation parity_refutation() {
    FregeRefutation ref;
    ref.cnf.n_vars = 1;
    ref.cnf.clauses = {{1}, {-1}};
    auto add = [&](Cedent c) {
        ref.cedents.push_back(std::move(c));
        return static_cast<std::uint32_t>(ref.cedents.size() - 1);
    };
    using R = Justification::Rule;
    BoolFormula x1 = BoolFormula::mkvar(1);
    BoolFormula nx1 = BoolFormula::mknot(x1);
    BoolFormula xempty = BoolFormula::mkxor({});
    BoolFormula nxempty = BoolFormula::mknot(xempty);
    BoolFormula px = BoolFormula::mkxor({nx1});

    Cedent c1; // -> x1
    c1.sucs = {x1};
    c1.by.rule = R::InitialClause;
    c1.by.clause = 1;
    std::uint32_t i1 = add(c1);
    Cedent c2; // ~x1 ->
    c2.ants = {nx1};
    c2.by.rule = R::NegL;
    c2.by.p1 = i1;
    std::uint32_t i2 = add(c2);
    Cedent c3; // ~x1, ~xor() ->
    c3.ants = {nx1, nxempty};
    c3.by.rule = R::WeakL;
    c3.by.p1 = i2;
    std::uint32_t i3 = add(c3);
    Cedent c4; // -> ~x1
    c4.sucs = {nx1};
    c4.by.rule = R::InitialClause;
    c4.by.clause = 2;
    std::uint32_t i4 = add(c4);
    Cedent c5; // xor() -> ~x1
    c5.ants = {xempty};
    c5.sucs = {nx1};
    c5.by.rule = R::WeakL;
    c5.by.p1 = i4;
    std::uint32_t i5 = add(c5);
    Cedent c6; // xor(~x1) ->
    c6.ants = {px};
    c6.by.rule = R::XorL;
    c6.by.p1 = i3;
    c6.by.p2 = i5;
    std::uint32_t i6 = add(c6);
    Cedent c7; // -> ~xor(~x1)
    c7.sucs = {BoolFormula::mknot(px)};
    c7.by.rule = R::NegR;
    c7.by.p1 = i6;
    std::uint32_t i7 = add(c7);
    Cedent c8; // -> ~xor()
    c8.sucs = {nxempty};
    c8.by.rule = R::AxiomNotXorEmpty;
    std::uint32_t i8 = add(c8);
    Cedent c9; // ~x1 -> ~xor()
    c9.ants = {nx1};
    c9.sucs = {nxempty};
    c9.by.rule = R::WeakL;
    c9.by.p1 = i8;
    std::uint32_t i9 = add(c9);
    Cedent c10; // -> ~x1
    c10.sucs = {nx1};
    c10.by.rule = R::InitialClause;
    c10.by.clause = 2;
    std::uint32_t i10 = add(c10);
    Cedent c11; // -> ~x1, xor()
    c11.sucs = {nx1, xempty};
    c11.by.rule = R::WeakR;
    c11.by.p1 = i10;
    std::uint32_t i11 = add(c11);
    Cedent c12; // -> xor(~x1)
    c12.sucs = {px};
    c12.by.rule = R::XorR;
    c12.by.p1 = i9;
    c12.by.p2 = i11;
    std::uint32_t i12 = add(c12);
    Cedent c13; // ->
    c13.by.rule = R::Cut;
    c13.by.p1 = i12;
    c13.by.p2 = i7;
    add(c13);
    return ref;
}

} // namespace ipskit
