#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/frege.hpp"

namespace ipskit {

// ------------------------------------------------------------ formula basics
//
// Propositional constants are the empty connectives: (or) is false and
// (and) is true.

inline BoolFormula prop_const(bool b) {
    return b ? BoolFormula::mkand({}) : BoolFormula::mkor({});
}

inline bool is_const_false(const BoolFormula& f) {
    return f.kind == BoolFormula::Kind::Or && f.children.empty();
}
inline bool is_const_true(const BoolFormula& f) {
    return f.kind == BoolFormula::Kind::And && f.children.empty();
}
inline bool is_prop_const(const BoolFormula& f) {
    return is_const_false(f) || is_const_true(f);
}

// Evaluation against a 1-based assignment vector (no 32-variable limit).
inline bool prop_eval(const BoolFormula& f, const std::vector<bool>& vals) {
    switch (f.kind) {
    case BoolFormula::Kind::Var:
        if (f.var == 0 || f.var > vals.size())
            throw UnassignedVariable("variable x" + std::to_string(f.var) + " unassigned");
        return vals[f.var - 1];
    case BoolFormula::Kind::Not:
        return !prop_eval(f.children[0], vals);
    case BoolFormula::Kind::Or:
        for (const auto& c : f.children)
            if (prop_eval(c, vals)) return true;
        return false;
    case BoolFormula::Kind::Xor: {
        bool v = false;
        for (const auto& c : f.children) v ^= prop_eval(c, vals);
        return v;
    }
    case BoolFormula::Kind::And:
        for (const auto& c : f.children)
            if (!prop_eval(c, vals)) return false;
        return true;
    }
    return false;
}

// Substitute formulas for some variables; untouched variables stay symbolic.
inline BoolFormula subst_formula_vars(const BoolFormula& f,
                                      const std::map<std::uint32_t, BoolFormula>& sub) {
    if (f.kind == BoolFormula::Kind::Var) {
        auto it = sub.find(f.var);
        return it == sub.end() ? f : it->second;
    }
    BoolFormula out = f;
    for (BoolFormula& c : out.children) c = subst_formula_vars(c, sub);
    return out;
}

// Remove constant subformulas: conjunction/disjunction units and absorbers,
// parities folding their constant children into one optional negation.  The
// result contains no constant proper subformula (and is idempotent).
inline BoolFormula simplify_constants(const BoolFormula& f) {
    using K = BoolFormula::Kind;
    switch (f.kind) {
    case K::Var:
        return f;
    case K::Not: {
        BoolFormula c = simplify_constants(f.children[0]);
        if (is_const_false(c)) return prop_const(true);
        if (is_const_true(c)) return prop_const(false);
        return BoolFormula::mknot(std::move(c));
    }
    case K::And:
    case K::Or: {
        const bool conj = f.kind == K::And;
        std::vector<BoolFormula> kids;
        for (const BoolFormula& ch : f.children) {
            BoolFormula c = simplify_constants(ch);
            if (conj ? is_const_true(c) : is_const_false(c)) continue;
            if (conj ? is_const_false(c) : is_const_true(c)) return prop_const(!conj);
            kids.push_back(std::move(c));
        }
        if (kids.empty()) return prop_const(conj);
        if (kids.size() == 1) return kids[0];
        return conj ? BoolFormula::mkand(std::move(kids)) : BoolFormula::mkor(std::move(kids));
    }
    case K::Xor: {
        bool parity = false;
        std::vector<BoolFormula> kids;
        for (const BoolFormula& ch : f.children) {
            BoolFormula c = simplify_constants(ch);
            if (is_const_false(c)) continue;
            if (is_const_true(c)) {
                parity = !parity;
                continue;
            }
            kids.push_back(std::move(c));
        }
        if (kids.empty()) return prop_const(parity);
        BoolFormula rest = kids.size() == 1 ? kids[0] : BoolFormula::mkxor(std::move(kids));
        return parity ? BoolFormula::mknot(std::move(rest)) : rest;
    }
    }
    return f;
}

namespace detail {

inline BoolFormula bnot(BoolFormula a) { return BoolFormula::mknot(std::move(a)); }
inline BoolFormula band2(BoolFormula a, BoolFormula b) {
    return BoolFormula::mkand({std::move(a), std::move(b)});
}
inline BoolFormula borv(std::vector<BoolFormula> kids) { return BoolFormula::mkor(std::move(kids)); }
inline BoolFormula bandv(std::vector<BoolFormula> kids) {
    return BoolFormula::mkand(std::move(kids));
}
// x <-> y written out as (x and y) or (not x and not y)
inline BoolFormula equiv(BoolFormula a, BoolFormula b) {
    return BoolFormula::mkor({band2(a, b), band2(bnot(a), bnot(b))});
}

inline std::uint32_t ceil_log2(std::uint64_t n) {
    std::uint32_t w = 0;
    while ((std::uint64_t{1} << w) < n) ++w;
    return w;
}

} // namespace detail

// ------------------------------------------------------------ bit encodings

// A string of bits, each given as a formula (constants for fixed objects,
// variables or derived formulas for symbolic ones), plus a map from named
// fields to bit ranges.
struct BitEncoding {
    struct Role {
        std::string name;
        std::size_t offset = 0;
        std::size_t width = 0;
    };
    std::vector<BoolFormula> bits;
    std::vector<Role> roles;
};

inline std::vector<bool> eval_bits(const BitEncoding& enc, const std::vector<bool>& vals) {
    std::vector<bool> out(enc.bits.size());
    for (std::size_t i = 0; i < enc.bits.size(); ++i) out[i] = prop_eval(enc.bits[i], vals);
    return out;
}

// ---------------------------------------------------- 3CNF clause encoding

inline std::size_t clause_bit_count(std::uint32_t n, std::uint32_t m) {
    return std::size_t{3} * m * (detail::ceil_log2(n) + 1);
}

// One literal is ceil(log2 n) index bits (the binary encoding of i-1, most
// significant bit first) followed by one sign bit (1 = positive).  Clauses
// narrower than 3 are padded by repeating their last literal.
inline BitEncoding encode_clause_bits(const CnfFormula& cnf) {
    if (cnf.n_vars == 0) throw InputError("clause encoding needs at least one variable");
    const std::uint32_t L = detail::ceil_log2(cnf.n_vars);
    BitEncoding enc;
    std::uint32_t ci = 0;
    for (const std::vector<std::int32_t>& clause : cnf.clauses) {
        ++ci;
        if (clause.empty() || clause.size() > 3)
            throw WidthNot3("clause " + std::to_string(ci) + " has width " +
                            std::to_string(clause.size()) + "; expected 1..3");
        std::vector<std::int32_t> lits = clause;
        while (lits.size() < 3) lits.push_back(lits.back());
        for (std::size_t j = 0; j < 3; ++j) {
            const std::int32_t lit = lits[j];
            const std::uint32_t idx = static_cast<std::uint32_t>(lit < 0 ? -lit : lit);
            if (idx == 0 || idx > cnf.n_vars)
                throw LiteralOutOfRange("literal index " + std::to_string(idx) + " out of range");
            BitEncoding::Role role;
            role.name = "clause" + std::to_string(ci) + ".lit" + std::to_string(j + 1);
            role.offset = enc.bits.size();
            role.width = L + 1;
            enc.roles.push_back(role);
            for (std::uint32_t k = 0; k < L; ++k)
                enc.bits.push_back(prop_const(((idx - 1) >> (L - 1 - k)) & 1u));
            enc.bits.push_back(prop_const(lit > 0));
        }
    }
    return enc;
}

// ---------------------------------------------------------------- truth_bool
//
// The universal evaluator formula for width-3 CNFs: over assignment
// variables p_1..p_n and, for each clause j and literal slot, index bits
// q and a sign bit s, it states that each clause has a literal whose
// decoded variable satisfies it.

inline BoolFormula build_truth_bool(std::uint32_t n, std::uint32_t m) {
    using detail::equiv;
    if (n == 0) throw InputError("truth formula needs at least one variable");
    const std::uint32_t L = detail::ceil_log2(n);
    auto qvar = [&](std::uint32_t clause, std::uint32_t lit, std::uint32_t k) {
        return BoolFormula::mkvar(n + (clause - 1) * 3 * (L + 1) + (lit - 1) * (L + 1) + k + 1);
    };
    std::vector<BoolFormula> clauses;
    for (std::uint32_t c = 1; c <= m; ++c) {
        std::vector<BoolFormula> lits;
        for (std::uint32_t j = 1; j <= 3; ++j) {
            std::vector<BoolFormula> cases;
            for (std::uint32_t i = 1; i <= n; ++i) {
                std::vector<BoolFormula> conj;
                for (std::uint32_t k = 0; k < L; ++k)
                    conj.push_back(equiv(qvar(c, j, k), prop_const(((i - 1) >> (L - 1 - k)) & 1u)));
                conj.push_back(equiv(BoolFormula::mkvar(i), qvar(c, j, L)));
                cases.push_back(detail::bandv(std::move(conj)));
            }
            lits.push_back(detail::borv(std::move(cases)));
        }
        clauses.push_back(detail::borv(std::move(lits)));
    }
    return detail::bandv(std::move(clauses));
}

// Substitute a fixed clause encoding into the truth formula (q variables are
// numbered after the n assignment variables, in encoding order).
inline BoolFormula bind_truth_bool(const BoolFormula& truth, std::uint32_t n,
                                   const BitEncoding& enc) {
    std::map<std::uint32_t, BoolFormula> sub;
    for (std::size_t i = 0; i < enc.bits.size(); ++i)
        sub[n + static_cast<std::uint32_t>(i) + 1] = enc.bits[i];
    return subst_formula_vars(truth, sub);
}

// ------------------------------------------------- algebraic circuit layout
//
// A circuit over at most n_inputs variables is encoded as n_records
// fixed-width gate records.  Each record is a 2-bit kind tag (00 add,
// 01 subtract, 10 multiply, 11 leaf) followed by two operand fields of
// field_width() bits each, most significant bit first.  For leaves the first
// operand field is a payload: 0 is the constant 0, 1 the constant 1, 2 the
// constant -1, and 3+i the variable x_{i+1}; payloads past the last variable
// decode as the constant 0.  For the other kinds the operand fields name
// earlier records; a reference at or beyond the record's own index decodes
// as the constant 0.  The circuit's output is the last record.

struct CircuitLayout {
    std::uint32_t n_inputs = 0;
    std::uint32_t n_records = 0;

    std::uint32_t field_width() const {
        return std::max(detail::ceil_log2(n_records),
                        detail::ceil_log2(std::uint64_t{n_inputs} + 3));
    }
    std::uint32_t record_width() const { return 2 + 2 * field_width(); }
    std::size_t total_bits() const { return std::size_t{n_records} * record_width(); }
};

namespace detail {

struct GateRecord {
    std::uint8_t kind = 0; // 0 add, 1 sub, 2 mul, 3 leaf
    std::uint64_t a = 0;
    std::uint64_t b = 0;
};

inline void render_records(BitEncoding& enc, const CircuitLayout& lay,
                           const std::vector<GateRecord>& recs) {
    const std::uint32_t w = lay.field_width();
    for (std::size_t r = 0; r < recs.size(); ++r) {
        BitEncoding::Role role;
        role.name = "record" + std::to_string(r);
        role.offset = enc.bits.size();
        role.width = lay.record_width();
        enc.roles.push_back(role);
        enc.bits.push_back(prop_const((recs[r].kind >> 1) & 1u));
        enc.bits.push_back(prop_const(recs[r].kind & 1u));
        for (std::uint32_t k = 0; k < w; ++k)
            enc.bits.push_back(prop_const((recs[r].a >> (w - 1 - k)) & 1u));
        for (std::uint32_t k = 0; k < w; ++k)
            enc.bits.push_back(prop_const((recs[r].b >> (w - 1 - k)) & 1u));
    }
}

} // namespace detail

// Encode a division-free single-output circuit as constant bits.  Ambient
// variables x_i map to input i; placeholder variables f_j map to input
// fvar_offset + j (pass the count of ambient inputs, or 0 when the circuit
// has no placeholders).
inline BitEncoding encode_circuit(const Circuit& c, const CircuitLayout& lay,
                                  std::uint32_t fvar_offset = 0) {
    using detail::GateRecord;
    if (c.outputs.size() != 1) throw InputError("encoding requires a single-output circuit");
    std::vector<GateRecord> recs;
    std::optional<std::uint64_t> zero_rec;
    auto push = [&](GateRecord g) {
        recs.push_back(g);
        return static_cast<std::uint64_t>(recs.size() - 1);
    };
    auto leaf = [&](std::uint64_t payload) { return push({3, payload, 0}); };
    auto zero = [&]() {
        if (!zero_rec) zero_rec = leaf(0);
        return *zero_rec;
    };
    auto invalid_ref = [&]() { return static_cast<std::uint64_t>(recs.size()); };

    // reachable nodes, in index order (children precede parents)
    std::vector<bool> need(c.nodes.size(), false);
    {
        std::vector<std::uint32_t> stack = {c.outputs[0]};
        while (!stack.empty()) {
            std::uint32_t id = stack.back();
            stack.pop_back();
            if (need[id]) continue;
            need[id] = true;
            for (std::uint32_t ch : c.nodes[id].children) stack.push_back(ch);
        }
    }
    std::vector<std::uint64_t> rec_of(c.nodes.size(), 0);
    for (std::size_t id = 0; id < c.nodes.size(); ++id) {
        if (!need[id]) continue;
        const Node& nd = c.nodes[id];
        switch (nd.kind) {
        case NodeKind::Const:
            if (nd.cval == 0)
                rec_of[id] = zero();
            else if (nd.cval == 1 || nd.cval == -1)
                rec_of[id] = leaf(nd.cval == 1 ? 1 : 2);
            else
                throw InputError("only the constants 0, 1, -1 have leaf encodings");
            break;
        case NodeKind::Var: {
            std::uint64_t idx;
            if (nd.var.cls == VarId::Class::X) {
                idx = nd.var.index;
            } else {
                if (fvar_offset == 0)
                    throw InputError("placeholder variables need an explicit input offset");
                idx = std::uint64_t{fvar_offset} + nd.var.index;
            }
            if (idx > lay.n_inputs)
                throw LayoutMismatch("variable input " + std::to_string(idx) +
                                     " exceeds layout inputs " + std::to_string(lay.n_inputs));
            rec_of[id] = leaf(idx + 2);
            break;
        }
        case NodeKind::Lin: {
            std::optional<std::uint64_t> acc;
            for (std::size_t t = 0; t < nd.children.size(); ++t) {
                std::int64_t coef = nd.coeffs[t];
                if (coef == 0) continue;
                const std::uint64_t child = rec_of[nd.children[t]];
                std::uint64_t term = child;
                const std::int64_t mag = coef < 0 ? -coef : coef;
                for (std::int64_t k = 1; k < mag; ++k) term = push({0, term, child});
                if (!acc)
                    acc = coef > 0 ? term : push({1, zero(), term});
                else
                    acc = push({static_cast<std::uint8_t>(coef > 0 ? 0 : 1), *acc, term});
            }
            rec_of[id] = acc ? *acc : zero();
            break;
        }
        case NodeKind::Prod: {
            std::uint64_t acc = rec_of[nd.children[0]];
            for (std::size_t t = 1; t < nd.children.size(); ++t)
                acc = push({2, acc, rec_of[nd.children[t]]});
            rec_of[id] = acc;
            break;
        }
        case NodeKind::Div:
            throw InputError("division gates have no encoding");
        }
        if (recs.size() > lay.n_records)
            throw LayoutMismatch("circuit needs more than " + std::to_string(lay.n_records) +
                                 " records");
    }
    std::uint64_t out = rec_of[c.outputs[0]];
    while (recs.size() < lay.n_records || out + 1 != recs.size()) {
        if (recs.size() >= lay.n_records)
            throw LayoutMismatch("circuit needs more than " + std::to_string(lay.n_records) +
                                 " records");
        const std::uint64_t self = invalid_ref();
        out = push({0, out, self}); // add the output to an invalid (zero) operand
    }
    BitEncoding enc;
    detail::render_records(enc, lay, recs);
    return enc;
}

// Decode a bit string back to an algebraic circuit (the testing oracle for
// the layout; tolerant of junk payloads and operand references by design).
inline Circuit decode_circuit(const CircuitLayout& lay, const std::vector<bool>& bits) {
    if (bits.size() != lay.total_bits())
        throw LayoutMismatch("expected " + std::to_string(lay.total_bits()) + " bits, got " +
                             std::to_string(bits.size()));
    const std::uint32_t w = lay.field_width();
    const std::uint32_t rw = lay.record_width();
    Circuit c;
    c.declared_xvars = lay.n_inputs;
    std::optional<std::uint32_t> zero_node;
    auto zero = [&]() {
        if (!zero_node) zero_node = c.add_const(0);
        return *zero_node;
    };
    std::vector<std::uint32_t> node_of(lay.n_records, 0);
    for (std::uint32_t r = 0; r < lay.n_records; ++r) {
        const std::size_t base = std::size_t{r} * rw;
        auto field = [&](std::uint32_t off) {
            std::uint64_t v = 0;
            for (std::uint32_t k = 0; k < w; ++k) v = (v << 1) | (bits[base + off + k] ? 1u : 0u);
            return v;
        };
        const std::uint8_t kind =
            static_cast<std::uint8_t>((bits[base] ? 2 : 0) | (bits[base + 1] ? 1 : 0));
        const std::uint64_t a = field(2);
        const std::uint64_t b = field(2 + w);
        if (kind == 3) {
            if (a == 1)
                node_of[r] = c.add_const(1);
            else if (a == 2)
                node_of[r] = c.add_const(-1);
            else if (a >= 3 && a - 2 <= lay.n_inputs)
                node_of[r] = c.add_var(VarId::X(static_cast<std::uint32_t>(a - 2)));
            else
                node_of[r] = zero();
            continue;
        }
        const std::uint32_t ra = a < r ? node_of[a] : zero();
        const std::uint32_t rb = b < r ? node_of[b] : zero();
        if (kind == 0)
            node_of[r] = c.add_lin({1, 1}, {ra, rb});
        else if (kind == 1)
            node_of[r] = c.add_lin({1, -1}, {ra, rb});
        else
            node_of[r] = c.add_prod({ra, rb});
    }
    c.outputs = {node_of[lay.n_records - 1]};
    return c;
}

// ------------------------------------------------------ encoding transforms

// Symbolic encoding whose bits are the propositional variables
// first_var .. first_var + total_bits - 1.
inline BitEncoding enc_from_vars(const CircuitLayout& lay, std::uint32_t first_var) {
    BitEncoding enc;
    for (std::size_t i = 0; i < lay.total_bits(); ++i)
        enc.bits.push_back(BoolFormula::mkvar(first_var + static_cast<std::uint32_t>(i)));
    const std::uint32_t rw = lay.record_width();
    for (std::uint32_t r = 0; r < lay.n_records; ++r)
        enc.roles.push_back({"record" + std::to_string(r), std::size_t{r} * rw, rw});
    return enc;
}

namespace detail {

// [field == t] over the w formula bits starting at `off` (MSB first).
inline BoolFormula field_eq(const std::vector<BoolFormula>& bits, std::size_t off, std::uint32_t w,
                            std::uint64_t t) {
    std::vector<BoolFormula> conj;
    for (std::uint32_t k = 0; k < w; ++k) {
        BoolFormula b = bits[off + k];
        conj.push_back(((t >> (w - 1 - k)) & 1u) ? b : bnot(b));
    }
    return bandv(std::move(conj));
}

inline std::vector<BoolFormula> const_code(std::uint64_t t, std::uint32_t w) {
    std::vector<BoolFormula> out;
    for (std::uint32_t k = 0; k < w; ++k) out.push_back(prop_const((t >> (w - 1 - k)) & 1u));
    return out;
}

// Rewrite every leaf record whose payload names variable i with sub(i)
// (a replacement payload, bitwise).  All other bits pass through.
inline BitEncoding map_leaf_payloads(
    const BitEncoding& enc, const CircuitLayout& lay,
    const std::function<std::optional<std::vector<BoolFormula>>(std::uint32_t)>& sub) {
    const std::uint32_t w = lay.field_width();
    const std::uint32_t rw = lay.record_width();
    if (enc.bits.size() != lay.total_bits())
        throw LayoutMismatch("encoding size does not match layout");
    std::vector<std::pair<std::uint32_t, std::vector<BoolFormula>>> repl;
    for (std::uint32_t i = 1; i <= lay.n_inputs; ++i)
        if (auto nb = sub(i)) {
            if (nb->size() != w) throw LayoutMismatch("replacement payload width mismatch");
            repl.emplace_back(i, std::move(*nb));
        }
    BitEncoding out;
    out.roles = enc.roles;
    for (std::uint32_t r = 0; r < lay.n_records; ++r) {
        const std::size_t base = std::size_t{r} * rw;
        BoolFormula is_leaf = band2(enc.bits[base], enc.bits[base + 1]);
        std::vector<BoolFormula> conds;
        for (const auto& [i, nb] : repl) {
            (void)nb;
            conds.push_back(band2(is_leaf, field_eq(enc.bits, base + 2, w, std::uint64_t{i} + 2)));
        }
        BoolFormula changed = borv(conds);
        out.bits.push_back(enc.bits[base]);
        out.bits.push_back(enc.bits[base + 1]);
        for (std::uint32_t k = 0; k < w; ++k) {
            std::vector<BoolFormula> alts = {band2(bnot(changed), enc.bits[base + 2 + k])};
            for (std::size_t ci = 0; ci < repl.size(); ++ci)
                alts.push_back(band2(conds[ci], repl[ci].second[k]));
            out.bits.push_back(simplify_constants(borv(std::move(alts))));
        }
        for (std::uint32_t k = 0; k < w; ++k) out.bits.push_back(enc.bits[base + 2 + w + k]);
    }
    return out;
}

// Append `enc`'s records to `out_bits`, widened to the field width of
// `newlay` and with operand references shifted by `delta`; leaf records
// naming a variable in `var_to_record` turn into add(record, invalid),
// i.e. a copy of that earlier record's value.
inline void append_shifted_records(std::vector<BoolFormula>& out_bits, const BitEncoding& enc,
                                   const CircuitLayout& oldlay, const CircuitLayout& newlay,
                                   std::uint32_t delta,
                                   const std::map<std::uint32_t, std::uint64_t>& var_to_record) {
    const std::uint32_t w = oldlay.field_width();
    const std::uint32_t nw = newlay.field_width();
    const std::uint32_t rw = oldlay.record_width();
    if (enc.bits.size() != oldlay.total_bits())
        throw LayoutMismatch("encoding size does not match layout");
    const std::uint64_t T = std::uint64_t{1} << w;
    for (std::uint32_t r = 0; r < oldlay.n_records; ++r) {
        const std::size_t base = std::size_t{r} * rw;
        const std::uint64_t self = std::uint64_t{delta} + r;
        BoolFormula is_leaf = band2(enc.bits[base], enc.bits[base + 1]);

        std::vector<BoolFormula> conds;
        std::vector<std::uint64_t> targets;
        for (const auto& [var, rec] : var_to_record) {
            conds.push_back(
                band2(is_leaf, field_eq(enc.bits, base + 2, w, std::uint64_t{var} + 2)));
            targets.push_back(rec);
        }
        BoolFormula rewired = borv(conds);

        // kind: leaves being rewired become additions (code 00)
        out_bits.push_back(simplify_constants(band2(bnot(rewired), enc.bits[base])));
        out_bits.push_back(simplify_constants(band2(bnot(rewired), enc.bits[base + 1])));

        for (std::uint32_t fld = 0; fld < 2; ++fld) {
            const std::size_t foff = base + 2 + std::size_t{fld} * w;
            // operand-shift mux (valid references move by delta, the rest
            // become self references, which decode as 0)
            std::vector<std::vector<BoolFormula>> shifted(nw);
            for (std::uint64_t t = 0; t < T; ++t) {
                const std::uint64_t nt = t < r ? t + delta : self;
                BoolFormula eq = field_eq(enc.bits, foff, w, t);
                for (std::uint32_t k = 0; k < nw; ++k)
                    if ((nt >> (nw - 1 - k)) & 1u) shifted[k].push_back(eq);
            }
            for (std::uint32_t k = 0; k < nw; ++k) {
                std::vector<BoolFormula> alts;
                for (std::size_t ci = 0; ci < conds.size(); ++ci) {
                    const std::uint64_t tgt = fld == 0 ? targets[ci] : self;
                    if ((tgt >> (nw - 1 - k)) & 1u) alts.push_back(conds[ci]);
                }
                // untouched leaf: zero-extended original payload
                if (k >= nw - w) {
                    BoolFormula orig = enc.bits[foff + (k - (nw - w))];
                    alts.push_back(bandv({is_leaf, bnot(rewired), std::move(orig)}));
                }
                alts.push_back(band2(bnot(is_leaf), borv(std::move(shifted[k]))));
                out_bits.push_back(simplify_constants(borv(std::move(alts))));
            }
        }
    }
}

inline void append_constant_record(std::vector<BoolFormula>& out_bits, const CircuitLayout& lay,
                                   const GateRecord& g) {
    const std::uint32_t w = lay.field_width();
    out_bits.push_back(prop_const((g.kind >> 1) & 1u));
    out_bits.push_back(prop_const(g.kind & 1u));
    for (std::uint32_t k = 0; k < w; ++k) out_bits.push_back(prop_const((g.a >> (w - 1 - k)) & 1u));
    for (std::uint32_t k = 0; k < w; ++k) out_bits.push_back(prop_const((g.b >> (w - 1 - k)) & 1u));
}

inline void default_roles(BitEncoding& enc, const CircuitLayout& lay) {
    const std::uint32_t rw = lay.record_width();
    for (std::uint32_t r = 0; r < lay.n_records; ++r)
        enc.roles.push_back({"record" + std::to_string(r), std::size_t{r} * rw, rw});
}

} // namespace detail

// [C(p)]: substitute the Boolean variables p_i (starting at first_p_var)
// for the circuit's inputs.
inline BitEncoding subst_boolean_inputs(const BitEncoding& enc, const CircuitLayout& lay,
                                        std::uint32_t first_p_var) {
    const std::uint32_t w = lay.field_width();
    return detail::map_leaf_payloads(enc, lay, [&](std::uint32_t i) {
        std::vector<BoolFormula> code(w, prop_const(false));
        code[w - 1] = BoolFormula::mkvar(first_p_var + i - 1); // payload p ? 1 : 0
        return std::optional<std::vector<BoolFormula>>(std::move(code));
    });
}

// [C(.., 0, ..)]: substitute the constant 0 for the listed inputs.
inline BitEncoding subst_zero(const BitEncoding& enc, const CircuitLayout& lay,
                              const std::set<std::uint32_t>& inputs) {
    const std::uint32_t w = lay.field_width();
    return detail::map_leaf_payloads(enc, lay,
                                     [&](std::uint32_t i) -> std::optional<std::vector<BoolFormula>> {
                                         if (!inputs.count(i)) return std::nullopt;
                                         return detail::const_code(0, w);
                                     });
}

// [C(pi(x))]: relabel inputs by a permutation of 1..n_inputs.
inline BitEncoding permute_inputs(const BitEncoding& enc, const CircuitLayout& lay,
                                  const std::vector<std::uint32_t>& perm) {
    if (perm.size() != lay.n_inputs) throw InputError("permutation arity mismatch");
    std::vector<bool> seen(lay.n_inputs, false);
    for (std::uint32_t p : perm) {
        if (p == 0 || p > lay.n_inputs || seen[p - 1])
            throw InputError("not a permutation of the inputs");
        seen[p - 1] = true;
    }
    const std::uint32_t w = lay.field_width();
    return detail::map_leaf_payloads(enc, lay, [&](std::uint32_t i) {
        return std::optional<std::vector<BoolFormula>>(
            detail::const_code(std::uint64_t{perm[i - 1]} + 2, w));
    });
}

// [1 - C]: append a constant-one leaf and one subtraction gate record.
inline std::pair<BitEncoding, CircuitLayout> one_minus(const BitEncoding& enc,
                                                       const CircuitLayout& lay) {
    CircuitLayout out_lay{lay.n_inputs, lay.n_records + 2};
    BitEncoding out;
    detail::append_shifted_records(out.bits, enc, lay, out_lay, 0, {});
    detail::append_constant_record(out.bits, out_lay, {3, 1, 0}); // leaf 1
    detail::append_constant_record(out.bits, out_lay,
                                   {1, lay.n_records, lay.n_records - 1}); // 1 - C
    detail::default_roles(out, out_lay);
    return {std::move(out), out_lay};
}

// [C(x, G)]: inline the encoded circuit G for input `position` of C.
inline std::pair<BitEncoding, CircuitLayout> subst_circuit(const BitEncoding& enc_c,
                                                           const CircuitLayout& lay_c,
                                                           const BitEncoding& enc_g,
                                                           const CircuitLayout& lay_g,
                                                           std::uint32_t position) {
    if (position == 0 || position > lay_c.n_inputs)
        throw InputError("substitution position out of range");
    CircuitLayout out_lay{std::max(lay_c.n_inputs, lay_g.n_inputs),
                          lay_g.n_records + lay_c.n_records};
    BitEncoding out;
    detail::append_shifted_records(out.bits, enc_g, lay_g, out_lay, 0, {});
    detail::append_shifted_records(out.bits, enc_c, lay_c, out_lay, lay_g.n_records,
                                   {{position, std::uint64_t{lay_g.n_records} - 1}});
    detail::default_roles(out, out_lay);
    return {std::move(out), out_lay};
}

// [C(x, Q^phi)]: substitute the clause polynomials of a symbolically encoded
// 3CNF (phi_bits, laid out as in encode_clause_bits over n variables and m
// clauses) for C's placeholder inputs n+1 .. n+m.  Each clause gets eleven
// records: per literal a constant-one leaf, a variable leaf selected by the
// index bits, and a gate that is 1-x for positive sign or x for negative
// sign; then two multiplications.
inline std::pair<BitEncoding, CircuitLayout> subst_clause_polys(
    const BitEncoding& enc_c, const CircuitLayout& lay_c,
    const std::vector<BoolFormula>& phi_bits, std::uint32_t n, std::uint32_t m) {
    using detail::band2;
    using detail::bnot;
    using detail::borv;
    if (lay_c.n_inputs != n + m) throw LayoutMismatch("certificate layout must cover x and f inputs");
    const std::uint32_t L = detail::ceil_log2(n);
    if (phi_bits.size() != clause_bit_count(n, m))
        throw LayoutMismatch("formula encoding has wrong bit count");
    CircuitLayout out_lay{lay_c.n_inputs, 11 * m + lay_c.n_records};
    const std::uint32_t w = out_lay.field_width();
    BitEncoding out;
    std::map<std::uint32_t, std::uint64_t> fmap;
    for (std::uint32_t i = 1; i <= m; ++i) {
        const std::uint64_t base = std::uint64_t{11} * (i - 1);
        for (std::uint32_t j = 1; j <= 3; ++j) {
            const std::size_t qoff =
                (std::size_t{i} - 1) * 3 * (L + 1) + (std::size_t{j} - 1) * (L + 1);
            const std::uint64_t rA = base + (j - 1) * 3;
            const std::uint64_t rB = rA + 1;
            const std::uint64_t rC = rA + 2;
            // rA: the constant 1
            detail::append_constant_record(out.bits, out_lay, {3, 1, 0});
            // rB: the selected variable leaf (indices past n select nothing
            // and the payload stays 0, i.e. the constant 0)
            out.bits.push_back(prop_const(true));
            out.bits.push_back(prop_const(true));
            for (std::uint32_t k = 0; k < w; ++k) {
                std::vector<BoolFormula> alts;
                for (std::uint64_t t = 0; t < n; ++t)
                    if (((t + 3) >> (w - 1 - k)) & 1u)
                        alts.push_back(detail::field_eq(phi_bits, qoff, L, t));
                out.bits.push_back(simplify_constants(borv(std::move(alts))));
            }
            for (std::uint32_t k = 0; k < w; ++k) out.bits.push_back(prop_const(false));
            // rC: sign ? rA - rB : rB + (invalid)
            const BoolFormula s = phi_bits[qoff + L];
            out.bits.push_back(prop_const(false));
            out.bits.push_back(s);
            auto mux = [&](std::uint64_t when_true, std::uint64_t when_false, std::uint32_t k) {
                std::vector<BoolFormula> alts;
                if ((when_true >> (w - 1 - k)) & 1u) alts.push_back(s);
                if ((when_false >> (w - 1 - k)) & 1u) alts.push_back(bnot(s));
                return simplify_constants(borv(std::move(alts)));
            };
            for (std::uint32_t k = 0; k < w; ++k) out.bits.push_back(mux(rA, rB, k));
            for (std::uint32_t k = 0; k < w; ++k) out.bits.push_back(mux(rB, rC, k));
        }
        detail::append_constant_record(out.bits, out_lay, {2, base + 2, base + 5});
        detail::append_constant_record(out.bits, out_lay, {2, base + 9, base + 8});
        fmap[n + i] = base + 10;
    }
    detail::append_shifted_records(out.bits, enc_c, lay_c, out_lay, 11 * m, fmap);
    detail::default_roles(out, out_lay);
    return {std::move(out), out_lay};
}

// ---------------------------------------------------------------- K circuits

struct KGate {
    enum class Op : std::uint8_t { Input, Const, And, Or, Not };
    Op op = Op::Const;
    std::uint32_t a = 0; // input index for Input, operand otherwise
    std::uint32_t b = 0;
    bool cval = false;
};

struct KCircuit {
    std::uint32_t input_width = 0;
    std::vector<KGate> gates;
    std::uint32_t output = 0;
};

inline void validate_k(const KCircuit& k) {
    for (std::size_t g = 0; g < k.gates.size(); ++g) {
        const KGate& gate = k.gates[g];
        switch (gate.op) {
        case KGate::Op::Input:
            if (gate.a >= k.input_width) throw InputError("K input index out of range");
            break;
        case KGate::Op::Const:
            break;
        case KGate::Op::Not:
            if (gate.a < g) break;
            throw InputError("K gate operands must precede the gate");
        case KGate::Op::And:
        case KGate::Op::Or:
            if (gate.a < g && gate.b < g) break;
            throw InputError("K gate operands must precede the gate");
        }
    }
    if (k.output >= k.gates.size()) throw InputError("K output out of range");
}

inline bool evaluate_k(const KCircuit& k, const std::vector<bool>& inputs,
                       std::vector<char>* scratch = nullptr) {
    if (inputs.size() != k.input_width) throw LayoutMismatch("K input width mismatch");
    std::vector<char> local;
    std::vector<char>& vals = scratch ? *scratch : local;
    vals.assign(k.gates.size(), 0);
    for (std::size_t g = 0; g < k.gates.size(); ++g) {
        const KGate& gate = k.gates[g];
        switch (gate.op) {
        case KGate::Op::Input: vals[g] = inputs[gate.a]; break;
        case KGate::Op::Const: vals[g] = gate.cval; break;
        case KGate::Op::And: vals[g] = vals[gate.a] && vals[gate.b]; break;
        case KGate::Op::Or: vals[g] = vals[gate.a] || vals[gate.b]; break;
        case KGate::Op::Not: vals[g] = !vals[gate.a]; break;
        }
    }
    return vals[k.output];
}

namespace detail {

struct KBuilder {
    KCircuit k;
    std::optional<std::uint32_t> true_gate, false_gate;

    explicit KBuilder(std::size_t width) {
        k.input_width = static_cast<std::uint32_t>(width);
    }
    std::uint32_t push(KGate g) {
        k.gates.push_back(g);
        return static_cast<std::uint32_t>(k.gates.size() - 1);
    }
    std::uint32_t input(std::uint32_t i) { return push({KGate::Op::Input, i, 0, false}); }
    std::uint32_t cst(bool v) {
        auto& slot = v ? true_gate : false_gate;
        if (!slot) slot = push({KGate::Op::Const, 0, 0, v});
        return *slot;
    }
    std::uint32_t band(std::uint32_t a, std::uint32_t b) { return push({KGate::Op::And, a, b, false}); }
    std::uint32_t bor(std::uint32_t a, std::uint32_t b) { return push({KGate::Op::Or, a, b, false}); }
    std::uint32_t bnot(std::uint32_t a) { return push({KGate::Op::Not, a, 0, false}); }
    std::uint32_t all(const std::vector<std::uint32_t>& xs) {
        if (xs.empty()) return cst(true);
        std::uint32_t acc = xs[0];
        for (std::size_t i = 1; i < xs.size(); ++i) acc = band(acc, xs[i]);
        return acc;
    }
    std::uint32_t any(const std::vector<std::uint32_t>& xs) {
        if (xs.empty()) return cst(false);
        std::uint32_t acc = xs[0];
        for (std::size_t i = 1; i < xs.size(); ++i) acc = bor(acc, xs[i]);
        return acc;
    }
};

} // namespace detail

// The bundled reference identity test: accept an encoded circuit exactly
// when it evaluates to 0 at every point of the grid {0,..,p-1}^n_inputs
// (arithmetic mod p).  This is correct polynomial identity testing whenever
// each variable's individual degree stays below p, and it accepts every
// identically-zero polynomial at any p.
inline KCircuit build_bruteforce_k(const CircuitLayout& lay, std::uint64_t p,
                                   std::uint64_t max_points = 200000) {
    if (p < 2) throw InputError("grid modulus must be at least 2");
    if (lay.n_records == 0) throw InputError("empty layout");
    const std::uint32_t w = lay.field_width();
    if (w > 16) throw CapError("field width too large for the reference identity test");
    std::uint64_t points = 1;
    for (std::uint32_t i = 0; i < lay.n_inputs; ++i) {
        points *= p;
        if (points > max_points) throw CapError("evaluation grid too large");
    }
    const std::uint32_t g = lay.n_records;
    const std::uint64_t T = std::uint64_t{1} << w;
    const std::uint32_t rw = lay.record_width();
    detail::KBuilder B(lay.total_bits());

    std::vector<std::uint32_t> pos(lay.total_bits()), neg(lay.total_bits());
    for (std::size_t i = 0; i < lay.total_bits(); ++i) {
        pos[i] = B.input(static_cast<std::uint32_t>(i));
        neg[i] = B.bnot(pos[i]);
    }
    auto field_eq = [&](std::size_t off, std::uint64_t t) {
        std::vector<std::uint32_t> conj;
        for (std::uint32_t k = 0; k < w; ++k)
            conj.push_back(((t >> (w - 1 - k)) & 1u) ? pos[off + k] : neg[off + k]);
        return B.all(conj);
    };

    std::vector<std::vector<std::uint32_t>> eqA(g), eqB(g);
    std::vector<std::uint32_t> is_add(g), is_sub(g), is_mul(g), is_leaf(g);
    std::vector<std::uint32_t> invA(g), invB(g);
    for (std::uint32_t r = 0; r < g; ++r) {
        const std::size_t base = std::size_t{r} * rw;
        is_add[r] = B.band(neg[base], neg[base + 1]);
        is_sub[r] = B.band(neg[base], pos[base + 1]);
        is_mul[r] = B.band(pos[base], neg[base + 1]);
        is_leaf[r] = B.band(pos[base], pos[base + 1]);
        std::vector<std::uint32_t> badA, badB;
        for (std::uint64_t t = 0; t < T; ++t) {
            eqA[r].push_back(field_eq(base + 2, t));
            eqB[r].push_back(field_eq(base + 2 + w, t));
            if (t >= r) {
                badA.push_back(eqA[r].back());
                badB.push_back(eqB[r].back());
            }
        }
        invA[r] = B.any(badA);
        invB[r] = B.any(badB);
    }

    std::vector<std::uint32_t> per_point;
    std::vector<std::uint64_t> alpha(lay.n_inputs, 0);
    for (std::uint64_t pt = 0; pt < points; ++pt) {
        std::vector<std::vector<std::uint32_t>> val(g);
        for (std::uint32_t r = 0; r < g; ++r) {
            // leaf payload value buckets at this point
            std::vector<std::vector<std::uint32_t>> bucket(p);
            for (std::uint64_t t = 0; t < T; ++t) {
                std::uint64_t v = 0;
                if (t == 1)
                    v = 1;
                else if (t == 2)
                    v = p - 1;
                else if (t >= 3 && t - 2 <= lay.n_inputs)
                    v = alpha[t - 3];
                bucket[v].push_back(eqA[r][t]);
            }
            auto child = [&](const std::vector<std::uint32_t>& eq, std::uint32_t invalid,
                             std::uint64_t c) {
                std::vector<std::uint32_t> alts;
                for (std::uint32_t j = 0; j < r; ++j) alts.push_back(B.band(eq[j], val[j][c]));
                if (c == 0) alts.push_back(invalid);
                return B.any(alts);
            };
            std::vector<std::uint32_t> chA(p), chB(p);
            for (std::uint64_t c = 0; c < p; ++c) {
                chA[c] = child(eqA[r], invA[r], c);
                chB[c] = child(eqB[r], invB[r], c);
            }
            val[r].resize(p);
            for (std::uint64_t c = 0; c < p; ++c) {
                std::vector<std::uint32_t> adds, subs, muls;
                for (std::uint64_t a = 0; a < p; ++a) {
                    adds.push_back(B.band(chA[a], chB[(c + p - a) % p]));
                    subs.push_back(B.band(chA[a], chB[(a + p - c) % p]));
                }
                for (std::uint64_t a = 0; a < p; ++a)
                    for (std::uint64_t b = 0; b < p; ++b)
                        if (a * b % p == c) muls.push_back(B.band(chA[a], chB[b]));
                val[r][c] = B.any({B.band(is_leaf[r], B.any(bucket[c])),
                                   B.band(is_add[r], B.any(adds)), B.band(is_sub[r], B.any(subs)),
                                   B.band(is_mul[r], B.any(muls))});
            }
        }
        per_point.push_back(val[g - 1][0]);
        for (std::uint32_t i = 0; i < lay.n_inputs; ++i) {
            if (++alpha[i] < p) break;
            alpha[i] = 0;
        }
    }
    B.k.output = B.all(per_point);
    return B.k;
}

using KFactory = std::function<KCircuit(const CircuitLayout&)>;

inline KFactory bruteforce_k_factory(std::uint64_t p, std::uint64_t max_points = 200000) {
    return [p, max_points](const CircuitLayout& lay) {
        return build_bruteforce_k(lay, p, max_points);
    };
}

// ------------------------------------------------------------ PIT statements
//
// A statement is an implication between runs of K on derived encodings:
// the conjunction of the premises' acceptances implies the (possibly
// negated) conjunction of the conclusions' acceptances.  Free variables
// 1..n_free feed the encodings; statement_formula introduces one auxiliary
// variable per K gate after them.

struct PitInstance {
    KCircuit k;
    BitEncoding enc;
};

struct PitStatement {
    std::vector<PitInstance> premises;
    std::vector<PitInstance> conclusions;
    bool conclusion_negated = false;
    std::uint32_t n_free = 0;
};

namespace detail {

inline PitInstance make_instance(KCircuit k, BitEncoding enc) {
    if (k.input_width != enc.bits.size())
        throw LayoutMismatch("K input width " + std::to_string(k.input_width) +
                             " does not match encoding size " + std::to_string(enc.bits.size()));
    validate_k(k);
    return {std::move(k), std::move(enc)};
}

} // namespace detail

inline bool statement_holds(const PitStatement& st, const std::vector<bool>& assignment) {
    std::vector<char> scratch;
    for (const PitInstance& inst : st.premises)
        if (!evaluate_k(inst.k, eval_bits(inst.enc, assignment), &scratch)) return true;
    bool concl = true;
    for (const PitInstance& inst : st.conclusions)
        concl = concl && evaluate_k(inst.k, eval_bits(inst.enc, assignment), &scratch);
    return st.conclusion_negated ? !concl : concl;
}

inline bool statement_tautology(const PitStatement& st, std::uint32_t max_free = 20) {
    if (st.n_free > max_free)
        throw CubeTooLarge("statement has " + std::to_string(st.n_free) + " free variables");
    std::vector<bool> a(st.n_free, false);
    const std::uint64_t total = std::uint64_t{1} << st.n_free;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (std::uint32_t i = 0; i < st.n_free; ++i) a[i] = (mask >> i) & 1u;
        if (!statement_holds(st, a)) return false;
    }
    return true;
}

// Render the statement as one formula: per-gate definitional equivalences
// k_g <-> (k_gl op k_gr), input bindings k_in <-> encoding bit, premise
// outputs, all conjoined, implying the conjunction of conclusion outputs.
inline BoolFormula statement_formula(const PitStatement& st) {
    using detail::equiv;
    std::uint32_t next = st.n_free + 1;
    std::vector<BoolFormula> antecedent;
    std::vector<BoolFormula> outs;
    auto add_instance = [&](const PitInstance& inst, bool premise) {
        const std::uint32_t base = next;
        next += static_cast<std::uint32_t>(inst.k.gates.size());
        auto kv = [&](std::uint32_t g) { return BoolFormula::mkvar(base + g); };
        for (std::uint32_t g = 0; g < inst.k.gates.size(); ++g) {
            const KGate& gate = inst.k.gates[g];
            switch (gate.op) {
            case KGate::Op::Input:
                antecedent.push_back(equiv(kv(g), inst.enc.bits[gate.a]));
                break;
            case KGate::Op::Const:
                antecedent.push_back(equiv(kv(g), prop_const(gate.cval)));
                break;
            case KGate::Op::And:
                antecedent.push_back(equiv(kv(g), detail::band2(kv(gate.a), kv(gate.b))));
                break;
            case KGate::Op::Or:
                antecedent.push_back(
                    equiv(kv(g), BoolFormula::mkor({kv(gate.a), kv(gate.b)})));
                break;
            case KGate::Op::Not:
                antecedent.push_back(equiv(kv(g), detail::bnot(kv(gate.a))));
                break;
            }
        }
        if (premise)
            antecedent.push_back(kv(inst.k.output));
        else
            outs.push_back(kv(inst.k.output));
    };
    for (const PitInstance& inst : st.premises) add_instance(inst, true);
    for (const PitInstance& inst : st.conclusions) add_instance(inst, false);
    BoolFormula concl = outs.size() == 1 ? outs[0] : detail::bandv(std::move(outs));
    if (st.conclusion_negated) concl = detail::bnot(std::move(concl));
    return BoolFormula::mkor({detail::bnot(detail::bandv(std::move(antecedent))), std::move(concl)});
}

// --------------------------------------------------------------- the axioms

struct PitAxiomOptions {
    std::uint32_t position = 1;              // axiom 3: which input G replaces
    const CircuitLayout* g_layout = nullptr; // axiom 3: layout of G
    std::vector<std::uint32_t> permutation;  // axiom 4
};

// 1: K([C(x)]) -> K([C(p)])           (boolean substitution)
// 2: K([C(x)]) -> not K([1 - C(x)])   (nonzero complement)
// 3: K([G]) and K([C(..,0,..)]) -> K([C(..,G,..)])
// 4: K([C(x)]) -> K([C(pi(x))])       (permutation closure)
inline PitStatement pit_axiom_statement(int which, const KFactory& factory,
                                        const CircuitLayout& lay,
                                        const PitAxiomOptions& opts = {}) {
    PitStatement st;
    const std::uint32_t W = static_cast<std::uint32_t>(lay.total_bits());
    BitEncoding q = enc_from_vars(lay, 1);
    switch (which) {
    case 1: {
        st.premises.push_back(detail::make_instance(factory(lay), q));
        st.conclusions.push_back(
            detail::make_instance(factory(lay), subst_boolean_inputs(q, lay, W + 1)));
        st.n_free = W + lay.n_inputs;
        break;
    }
    case 2: {
        st.premises.push_back(detail::make_instance(factory(lay), q));
        auto [enc2, lay2] = one_minus(q, lay);
        st.conclusions.push_back(detail::make_instance(factory(lay2), std::move(enc2)));
        st.conclusion_negated = true;
        st.n_free = W;
        break;
    }
    case 3: {
        if (!opts.g_layout) throw InputError("axiom 3 needs the layout of G");
        const CircuitLayout& layg = *opts.g_layout;
        const std::uint32_t Wg = static_cast<std::uint32_t>(layg.total_bits());
        BitEncoding qg = enc_from_vars(layg, 1);
        BitEncoding qc = enc_from_vars(lay, Wg + 1);
        st.premises.push_back(detail::make_instance(factory(layg), qg));
        st.premises.push_back(
            detail::make_instance(factory(lay), subst_zero(qc, lay, {opts.position})));
        auto [enc3, lay3] = subst_circuit(qc, lay, qg, layg, opts.position);
        st.conclusions.push_back(detail::make_instance(factory(lay3), std::move(enc3)));
        st.n_free = Wg + W;
        break;
    }
    case 4: {
        st.premises.push_back(detail::make_instance(factory(lay), q));
        st.conclusions.push_back(
            detail::make_instance(factory(lay), permute_inputs(q, lay, opts.permutation)));
        st.n_free = W;
        break;
    }
    default:
        throw InputError("axiom index must be 1..4");
    }
    return st;
}

inline BoolFormula build_pit_axiom(int which, const KFactory& factory, const CircuitLayout& lay,
                                   const PitAxiomOptions& opts = {}) {
    return statement_formula(pit_axiom_statement(which, factory, lay, opts));
}

// ----------------------------------------------------------------- proof_ips
//
// Free variables: first the q bits encoding the candidate certificate C
// (over inputs x_1..x_n, f_1..f_m), then the 3CNF encoding bits of phi.
// The statement asserts K([C(x,0)]) and K([1 - C(x, Q^phi(x))]).

struct ProofIpsLayout {
    std::uint32_t n = 0; // 3CNF variables
    std::uint32_t m = 0; // 3CNF clauses
    CircuitLayout cert;  // layout of C; must have n + m inputs
};

inline PitStatement proof_ips_statement(const KFactory& factory, const ProofIpsLayout& pl) {
    if (pl.cert.n_inputs != pl.n + pl.m)
        throw LayoutMismatch("certificate layout must have n + m inputs");
    const std::uint32_t Wc = static_cast<std::uint32_t>(pl.cert.total_bits());
    const std::uint32_t Wphi = static_cast<std::uint32_t>(clause_bit_count(pl.n, pl.m));
    BitEncoding qc = enc_from_vars(pl.cert, 1);
    std::vector<BoolFormula> phi;
    for (std::uint32_t i = 0; i < Wphi; ++i) phi.push_back(BoolFormula::mkvar(Wc + 1 + i));
    std::set<std::uint32_t> fvars;
    for (std::uint32_t j = 1; j <= pl.m; ++j) fvars.insert(pl.n + j);

    PitStatement st;
    st.n_free = Wc + Wphi;
    st.conclusions.push_back(
        detail::make_instance(factory(pl.cert), subst_zero(qc, pl.cert, fvars)));
    auto [encq, layq] = subst_clause_polys(qc, pl.cert, phi, pl.n, pl.m);
    auto [enc2, lay2] = one_minus(encq, layq);
    st.conclusions.push_back(detail::make_instance(factory(lay2), std::move(enc2)));
    return st;
}

inline BoolFormula build_proof_ips(const KFactory& factory, const ProofIpsLayout& pl) {
    return statement_formula(proof_ips_statement(factory, pl));
}

// Overload for explicitly supplied K circuits (one per conclusion copy).
inline BoolFormula build_proof_ips(const KCircuit& k1, const KCircuit& k2,
                                   const ProofIpsLayout& pl) {
    std::size_t which = 0;
    KFactory pick = [&](const CircuitLayout& lay) -> KCircuit {
        const KCircuit& k = which++ == 0 ? k1 : k2;
        if (k.input_width != lay.total_bits())
            throw LayoutMismatch("K input width does not match the derived layout");
        return k;
    };
    return build_proof_ips(pick, pl);
}

// ------------------------------------------------------------ tseitin export

struct TseitinCnf {
    CnfFormula cnf;
    std::uint32_t root = 0;     // literal asserted by the final unit clause
    std::uint32_t n_inputs = 0; // original variables come first
};

namespace detail {

inline std::int32_t tseitin_lit(const BoolFormula& f, CnfFormula& cnf, std::uint32_t& next) {
    using K = BoolFormula::Kind;
    auto fresh = [&]() { return static_cast<std::int32_t>(next++); };
    switch (f.kind) {
    case K::Var:
        return static_cast<std::int32_t>(f.var);
    case K::Not:
        return -tseitin_lit(f.children[0], cnf, next);
    case K::And:
    case K::Or: {
        const bool conj = f.kind == K::And;
        std::vector<std::int32_t> kids;
        for (const BoolFormula& c : f.children) kids.push_back(tseitin_lit(c, cnf, next));
        const std::int32_t z = fresh();
        std::vector<std::int32_t> big = {conj ? z : -z};
        for (std::int32_t l : kids) {
            cnf.clauses.push_back({conj ? -z : z, conj ? l : -l});
            big.push_back(conj ? -l : l);
        }
        cnf.clauses.push_back(big);
        return z;
    }
    case K::Xor: {
        if (f.children.empty()) {
            const std::int32_t z = fresh();
            cnf.clauses.push_back({-z});
            return z;
        }
        std::int32_t acc = tseitin_lit(f.children[0], cnf, next);
        for (std::size_t i = 1; i < f.children.size(); ++i) {
            const std::int32_t b = tseitin_lit(f.children[i], cnf, next);
            const std::int32_t z = fresh();
            cnf.clauses.push_back({-z, acc, b});
            cnf.clauses.push_back({-z, -acc, -b});
            cnf.clauses.push_back({z, -acc, b});
            cnf.clauses.push_back({z, acc, -b});
            acc = z;
        }
        return acc;
    }
    }
    return 0;
}

} // namespace detail

// Equisatisfiable CNF with one auxiliary variable per connective, asserted
// by a final unit clause.  `n_vars` may widen the declared input count.
inline TseitinCnf tseitin_cnf(const BoolFormula& f, std::uint32_t n_vars = 0) {
    std::uint32_t max_in = n_vars;
    std::function<void(const BoolFormula&)> scan = [&](const BoolFormula& g) {
        if (g.kind == BoolFormula::Kind::Var) max_in = std::max(max_in, g.var);
        for (const BoolFormula& c : g.children) scan(c);
    };
    scan(f);
    TseitinCnf out;
    out.n_inputs = max_in;
    std::uint32_t next = max_in + 1;
    std::int32_t root = detail::tseitin_lit(f, out.cnf, next);
    if (root == 0 || f.kind == BoolFormula::Kind::Var || f.kind == BoolFormula::Kind::Not) {
        // ensure a defined positive root variable even for bare literals
        const std::int32_t z = static_cast<std::int32_t>(next++);
        if (root == 0) {
            out.cnf.clauses.push_back({is_const_true(f) ? z : -z});
        } else {
            out.cnf.clauses.push_back({-z, root});
            out.cnf.clauses.push_back({z, -root});
        }
        root = z;
    }
    out.cnf.clauses.push_back({root});
    out.root = static_cast<std::uint32_t>(root);
    out.cnf.n_vars = next - 1;
    return out;
}

inline std::string write_dimacs(const CnfFormula& cnf) {
    std::ostringstream out;
    out << "p cnf " << cnf.n_vars << ' ' << cnf.clauses.size() << '\n';
    for (const auto& clause : cnf.clauses) {
        for (std::int32_t lit : clause) out << lit << ' ';
        out << "0\n";
    }
    return out.str();
}

} // namespace ipskit
