#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ipskit/circuit.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/field.hpp"

namespace ipskit {

using Coef = boost::multiprecision::cpp_int;

// Sorted sparse exponent vector; no zero exponents stored.
struct Monomial {
    std::vector<std::pair<VarId, std::uint32_t>> exps; // sorted by VarId

    static Monomial one() { return {}; }
    static Monomial var(VarId v, std::uint32_t e = 1) {
        Monomial m;
        if (e > 0) m.exps.push_back({v, e});
        return m;
    }
    bool is_one() const { return exps.empty(); }
    std::uint64_t total_degree() const {
        std::uint64_t d = 0;
        for (const auto& [v, e] : exps) d += e;
        return d;
    }
    std::uint32_t exponent(VarId v) const {
        for (const auto& [w, e] : exps)
            if (w == v) return e;
        return 0;
    }
    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial r;
        std::size_t i = 0, j = 0;
        while (i < a.exps.size() || j < b.exps.size()) {
            if (j == b.exps.size() || (i < a.exps.size() && a.exps[i].first < b.exps[j].first)) {
                r.exps.push_back(a.exps[i++]);
            } else if (i == a.exps.size() || b.exps[j].first < a.exps[i].first) {
                r.exps.push_back(b.exps[j++]);
            } else {
                r.exps.push_back({a.exps[i].first, a.exps[i].second + b.exps[j].second});
                ++i; ++j;
            }
        }
        return r;
    }
    // a / b; second component false when b does not divide a.
    friend std::pair<Monomial, bool> mono_div(const Monomial& a, const Monomial& b) {
        Monomial r;
        std::size_t i = 0;
        for (const auto& [v, e] : b.exps) {
            while (i < a.exps.size() && a.exps[i].first < v) r.exps.push_back(a.exps[i++]);
            if (i == a.exps.size() || !(a.exps[i].first == v) || a.exps[i].second < e)
                return {Monomial{}, false};
            if (a.exps[i].second > e) r.exps.push_back({v, a.exps[i].second - e});
            ++i;
        }
        while (i < a.exps.size()) r.exps.push_back(a.exps[i++]);
        return {r, true};
    }
    friend Monomial mono_lcm(const Monomial& a, const Monomial& b) {
        Monomial r;
        std::size_t i = 0, j = 0;
        while (i < a.exps.size() || j < b.exps.size()) {
            if (j == b.exps.size() || (i < a.exps.size() && a.exps[i].first < b.exps[j].first)) {
                r.exps.push_back(a.exps[i++]);
            } else if (i == a.exps.size() || b.exps[j].first < a.exps[i].first) {
                r.exps.push_back(b.exps[j++]);
            } else {
                r.exps.push_back({a.exps[i].first, std::max(a.exps[i].second, b.exps[j].second)});
                ++i; ++j;
            }
        }
        return r;
    }
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps == b.exps; }
    std::string str() const {
        if (exps.empty()) return "1";
        std::string s;
        for (std::size_t i = 0; i < exps.size(); ++i) {
            if (i) s += "*";
            s += exps[i].first.str();
            if (exps[i].second > 1) s += "^" + std::to_string(exps[i].second);
        }
        return s;
    }
};

enum class MonoOrder { Lex, GrevLex, ElimX };

namespace detail {

// Variable priority: x1 > x2 > ... > f1 > f2 > ... which is exactly ascending VarId.
// Returns +1 if a > b in the order, -1 if a < b, 0 if equal.
inline int cmp_lex(const Monomial& a, const Monomial& b) {
    std::size_t i = 0, j = 0;
    while (i < a.exps.size() && j < b.exps.size()) {
        if (a.exps[i].first == b.exps[j].first) {
            if (a.exps[i].second != b.exps[j].second)
                return a.exps[i].second > b.exps[j].second ? 1 : -1;
            ++i; ++j;
        } else if (a.exps[i].first < b.exps[j].first) {
            return 1; // a has a positive power on a higher-priority variable
        } else {
            return -1;
        }
    }
    if (i < a.exps.size()) return 1;
    if (j < b.exps.size()) return -1;
    return 0;
}

inline int cmp_grevlex(const Monomial& a, const Monomial& b) {
    std::uint64_t da = a.total_degree(), db = b.total_degree();
    if (da != db) return da > db ? 1 : -1;
    // Tie-break: scan from the lowest-priority end; the monomial with the
    // LARGER exponent on the first differing variable is the SMALLER one.
    std::size_t i = a.exps.size(), j = b.exps.size();
    while (i > 0 && j > 0) {
        const auto& [va, ea] = a.exps[i - 1];
        const auto& [vb, eb] = b.exps[j - 1];
        if (va == vb) {
            if (ea != eb) return ea > eb ? -1 : 1;
            --i; --j;
        } else if (vb < va) {
            return -1; // a has the lower-priority variable with positive power
        } else {
            return 1;
        }
    }
    if (i > 0) return -1;
    if (j > 0) return 1;
    return 0;
}

inline Monomial restrict_class(const Monomial& m, VarId::Class cls) {
    Monomial r;
    for (const auto& [v, e] : m.exps)
        if (v.cls == cls) r.exps.push_back({v, e});
    return r;
}

} // namespace detail

// +1 if a > b, -1 if a < b, 0 if equal, under the given order.
inline int mono_cmp(const Monomial& a, const Monomial& b, MonoOrder ord) {
    switch (ord) {
    case MonoOrder::Lex: return detail::cmp_lex(a, b);
    case MonoOrder::GrevLex: return detail::cmp_grevlex(a, b);
    case MonoOrder::ElimX: {
        // Block order eliminating X: compare X-parts grevlex, then F-parts.
        int c = detail::cmp_grevlex(detail::restrict_class(a, VarId::Class::X),
                                    detail::restrict_class(b, VarId::Class::X));
        if (c != 0) return c;
        return detail::cmp_grevlex(detail::restrict_class(a, VarId::Class::F),
                                   detail::restrict_class(b, VarId::Class::F));
    }
    }
    return 0;
}

struct MonoLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        return detail::cmp_lex(a, b) < 0;
    }
};

struct Caps {
    std::size_t max_terms = 2'000'000;
    std::uint64_t max_degree = 64;
};

// Exact sparse polynomial. modulus > 0: coefficients canonical in [0, p).
// modulus == 0: exact integer coefficients.
class SparsePoly {
public:
    using TermMap = std::map<Monomial, Coef, MonoLexLess>;

    explicit SparsePoly(std::uint64_t modulus = 0) : mod_(modulus) {}

    static SparsePoly constant(const Coef& c, std::uint64_t modulus) {
        SparsePoly p(modulus);
        p.add_term(Monomial::one(), c);
        return p;
    }
    static SparsePoly variable(VarId v, std::uint64_t modulus) {
        SparsePoly p(modulus);
        p.add_term(Monomial::var(v), 1);
        return p;
    }

    std::uint64_t modulus() const { return mod_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    std::uint64_t total_degree() const {
        std::uint64_t d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.total_degree());
        return d;
    }
    Coef constant_term() const {
        auto it = terms_.find(Monomial::one());
        return it == terms_.end() ? Coef(0) : it->second;
    }

    void add_term(const Monomial& m, Coef c) {
        reduce(c);
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            reduce(it->second);
            if (it->second == 0) terms_.erase(it);
        }
    }

    friend SparsePoly operator+(const SparsePoly& a, const SparsePoly& b) {
        check_mod(a, b);
        SparsePoly r = a;
        for (const auto& [m, c] : b.terms_) r.add_term(m, c);
        return r;
    }
    friend SparsePoly operator-(const SparsePoly& a, const SparsePoly& b) {
        check_mod(a, b);
        SparsePoly r = a;
        for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
        return r;
    }
    friend SparsePoly operator*(const SparsePoly& a, const SparsePoly& b) {
        check_mod(a, b);
        SparsePoly r(a.mod_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_)
                r.add_term(ma * mb, ca * cb);
        return r;
    }
    SparsePoly scaled(const Coef& c) const {
        SparsePoly r(mod_);
        for (const auto& [m, co] : terms_) r.add_term(m, co * c);
        return r;
    }
    SparsePoly times_monomial(const Monomial& mono, const Coef& c) const {
        SparsePoly r(mod_);
        for (const auto& [m, co] : terms_) r.add_term(m * mono, co * c);
        return r;
    }
    SparsePoly negated() const { return scaled(-1); }

    void enforce_caps(const Caps& caps) const {
        if (terms_.size() > caps.max_terms)
            throw TermBlowup("term count " + std::to_string(terms_.size()) + " exceeds cap " +
                             std::to_string(caps.max_terms));
        if (total_degree() > caps.max_degree)
            throw DegreeBlowup("degree " + std::to_string(total_degree()) + " exceeds cap " +
                               std::to_string(caps.max_degree));
    }

    // Leading term under the given order.
    std::pair<Monomial, Coef> leading_term(MonoOrder ord) const {
        if (terms_.empty()) throw InputError("leading term of zero polynomial");
        auto best = terms_.begin();
        for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it)
            if (mono_cmp(it->first, best->first, ord) > 0) best = it;
        return {best->first, best->second};
    }

    FieldElement eval(const std::map<VarId, FieldElement>& point, const Prime& p) const {
        if (mod_ != 0 && mod_ != p.value()) throw ModulusMismatch("eval under different modulus");
        FieldElement acc(0, p);
        for (const auto& [m, c] : terms_) {
            Coef cr = c % Coef(p.value());
            if (cr < 0) cr += Coef(p.value());
            FieldElement t(cr.convert_to<std::uint64_t>(), p);
            for (const auto& [v, e] : m.exps) {
                auto it = point.find(v);
                if (it == point.end()) throw UnassignedVariable("variable " + v.str() + " unassigned");
                t = t * fp_pow(it->second, e);
            }
            acc = acc + t;
        }
        return acc;
    }

    friend bool operator==(const SparsePoly& a, const SparsePoly& b) {
        check_mod(a, b);
        return a.terms_ == b.terms_;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        // Deterministic: descending lex.
        std::ostringstream os;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            if (!first) os << " + ";
            first = false;
            os << it->second.str();
            if (!it->first.is_one()) os << "*" << it->first.str();
        }
        return os.str();
    }

private:
    std::uint64_t mod_;
    TermMap terms_;

    void reduce(Coef& c) const {
        if (mod_ == 0) return;
        c %= Coef(mod_);
        if (c < 0) c += Coef(mod_);
    }
    static void check_mod(const SparsePoly& a, const SparsePoly& b) {
        if (a.mod_ != b.mod_) throw ModulusMismatch("polynomials under different moduli");
    }
};

inline bool poly_equal(const SparsePoly& a, const SparsePoly& b) { return a == b; }

// ---------------------------------------------------------------- expansion

// Exact canonical polynomial computed by a division-free circuit; the
// brute-force stand-in for identity testing at desk scale.
inline SparsePoly expand_circuit(const Circuit& c, const Caps& caps = Caps{},
                                 std::uint64_t modulus = 0) {
    if (!c.division_free()) throw InputError("expand_circuit requires a division-free circuit");
    std::vector<SparsePoly> vals(c.nodes.size(), SparsePoly(modulus));
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        switch (n.kind) {
        case NodeKind::Const:
            vals[i] = SparsePoly::constant(n.cval, modulus);
            break;
        case NodeKind::Var:
            vals[i] = SparsePoly::variable(n.var, modulus);
            break;
        case NodeKind::Lin: {
            SparsePoly acc(modulus);
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                acc = acc + vals[n.children[k]].scaled(n.coeffs[k]);
                acc.enforce_caps(caps);
            }
            vals[i] = std::move(acc);
            break;
        }
        case NodeKind::Prod: {
            SparsePoly acc = SparsePoly::constant(1, modulus);
            for (auto ch : n.children) {
                acc = acc * vals[ch];
                acc.enforce_caps(caps);
            }
            vals[i] = std::move(acc);
            break;
        }
        case NodeKind::Div:
            break; // unreachable
        }
    }
    if (c.outputs.size() != 1) throw InputError("expand_circuit requires a single output");
    return vals[c.outputs[0]];
}

// Build an explicit sum-of-monomials circuit computing p (used when a
// computed polynomial must re-enter the circuit world).
inline Circuit poly_to_circuit(const SparsePoly& p) {
    Circuit c;
    if (p.is_zero()) {
        c.outputs = {c.add_const(0)};
        return c;
    }
    std::map<VarId, std::uint32_t> var_nodes;
    std::vector<std::int64_t> coeffs;
    std::vector<std::uint32_t> terms;
    for (const auto& [m, co] : p.terms()) {
        if (co < std::numeric_limits<std::int64_t>::min() ||
            co > std::numeric_limits<std::int64_t>::max())
            throw IntegerOverflow("coefficient too large for circuit constant");
        std::vector<std::uint32_t> factors;
        for (const auto& [v, e] : m.exps) {
            auto it = var_nodes.find(v);
            std::uint32_t vn = it != var_nodes.end() ? it->second : (var_nodes[v] = c.add_var(v));
            for (std::uint32_t k = 0; k < e; ++k) factors.push_back(vn);
        }
        std::uint32_t t;
        if (factors.empty()) t = c.add_const(1);
        else if (factors.size() == 1) t = factors[0];
        else t = c.add_prod(factors);
        coeffs.push_back(co.convert_to<std::int64_t>());
        terms.push_back(t);
    }
    c.outputs = {c.add_lin(coeffs, terms)};
    return c;
}

// ---------------------------------------------------------------- division

struct DivisionResult {
    std::vector<SparsePoly> quotients;
    SparsePoly remainder;
    DivisionResult(std::size_t k, std::uint64_t mod)
        : quotients(k, SparsePoly(mod)), remainder(mod) {}
};

// Multivariate division of g by the divisors in order; remainder is in normal
// form (no term divisible by any divisor's leading monomial). Requires a field
// (modulus > 0).
inline DivisionResult poly_divide(const SparsePoly& g, const std::vector<SparsePoly>& divisors,
                                  MonoOrder ord, const Caps& caps = Caps{}) {
    if (g.modulus() == 0) throw UnsupportedModulus("division requires a prime modulus");
    const std::uint64_t mod = g.modulus();
    Prime p(mod);
    DivisionResult res(divisors.size(), mod);
    std::vector<std::pair<Monomial, Coef>> lts;
    lts.reserve(divisors.size());
    for (const auto& d : divisors) {
        if (d.modulus() != mod) throw ModulusMismatch("divisor under different modulus");
        if (d.is_zero()) throw InputError("zero divisor");
        lts.push_back(d.leading_term(ord));
    }
    SparsePoly rest = g;
    while (!rest.is_zero()) {
        auto [lm, lc] = rest.leading_term(ord);
        bool reduced = false;
        for (std::size_t k = 0; k < divisors.size(); ++k) {
            auto [q, ok] = mono_div(lm, lts[k].first);
            if (!ok) continue;
            FieldElement ratio = FieldElement(Coef(lc % mod).convert_to<std::uint64_t>(), p) *
                                 fp_inverse(FieldElement(Coef(lts[k].second % mod).convert_to<std::uint64_t>(), p));
            Coef rc(ratio.value);
            res.quotients[k].add_term(q, rc);
            rest = rest - divisors[k].times_monomial(q, rc);
            rest.enforce_caps(caps);
            reduced = true;
            break;
        }
        if (!reduced) {
            res.remainder.add_term(lm, lc);
            // Removing the leading term keeps the loop terminating.
            SparsePoly lt(mod);
            lt.add_term(lm, lc);
            rest = rest - lt;
        }
    }
    return res;
}

} // namespace ipskit
