#include "rwtn/fol.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rwtn::fol {

void Signature::check_fresh(const std::string& name) const {
    if (is_constant(name) || is_function(name) || is_predicate(name))
        throw ConfigError("signature: duplicate symbol '" + name + "'");
}

void Signature::add_constant(const std::string& name) {
    check_fresh(name);
    constants_.emplace(name, 0);
    constant_order_.push_back(name);
}

void Signature::add_function(const std::string& name, int arity) {
    if (arity < 1) throw ConfigError("signature: function arity must be >= 1");
    check_fresh(name);
    functions_.emplace(name, arity);
    function_order_.emplace_back(name, arity);
}

void Signature::add_predicate(const std::string& name, int arity) {
    if (arity < 1 || arity > 2)
        throw ConfigError("signature: predicate arity must be 1 or 2");
    check_fresh(name);
    predicates_.emplace(name, arity);
    predicate_order_.emplace_back(name, arity);
}

std::vector<std::string> Signature::unary_predicates() const {
    std::vector<std::string> out;
    for (const auto& [name, arity] : predicate_order_)
        if (arity == 1) out.push_back(name);
    return out;
}

std::vector<std::string> Signature::binary_predicates() const {
    std::vector<std::string> out;
    for (const auto& [name, arity] : predicate_order_)
        if (arity == 2) out.push_back(name);
    return out;
}

Formula atom(std::string pred, std::vector<Term> terms) {
    Formula f;
    f.kind = Formula::Kind::Atom;
    f.pred = std::move(pred);
    f.terms = std::move(terms);
    return f;
}

Formula lnot(Formula f) {
    Formula o;
    o.kind = Formula::Kind::Not;
    o.kids.push_back(std::move(f));
    return o;
}

static Formula binary(Formula::Kind k, Formula a, Formula b) {
    Formula o;
    o.kind = k;
    o.kids.push_back(std::move(a));
    o.kids.push_back(std::move(b));
    return o;
}

Formula land(Formula a, Formula b) { return binary(Formula::Kind::And, std::move(a), std::move(b)); }
Formula lor(Formula a, Formula b) { return binary(Formula::Kind::Or, std::move(a), std::move(b)); }
Formula implies(Formula a, Formula b) {
    return binary(Formula::Kind::Implies, std::move(a), std::move(b));
}

static Formula quantifier(Formula::Kind k, std::vector<std::string> vars, Formula body) {
    Formula o;
    o.kind = k;
    o.vars = std::move(vars);
    o.kids.push_back(std::move(body));
    return o;
}

Formula forall(std::vector<std::string> vars, Formula body) {
    return quantifier(Formula::Kind::ForAll, std::move(vars), std::move(body));
}

Formula exists(std::vector<std::string> vars, Formula body) {
    return quantifier(Formula::Kind::Exists, std::move(vars), std::move(body));
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Colon, Not, And, Or, Implies, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;  // 1-based
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }
    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (c == '#') {  // comment to end of input/line
                i_ = s_.size();
                break;
            }
            if (std::isspace(static_cast<unsigned char>(c)))
                ++i_;
            else
                break;
        }
        const std::size_t pos = i_ + 1;
        if (i_ >= s_.size()) {
            tok_ = {Tok::End, "", pos};
            return;
        }
        char c = s_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_' || s_[j] == '\''))
                ++j;
            tok_ = {Tok::Ident, s_.substr(i_, j - i_), pos};
            i_ = j;
            return;
        }
        switch (c) {
            case '(': tok_ = {Tok::LParen, "(", pos}; ++i_; return;
            case ')': tok_ = {Tok::RParen, ")", pos}; ++i_; return;
            case ',': tok_ = {Tok::Comma, ",", pos}; ++i_; return;
            case ':': tok_ = {Tok::Colon, ":", pos}; ++i_; return;
            case '~': tok_ = {Tok::Not, "~", pos}; ++i_; return;
            case '&': tok_ = {Tok::And, "&", pos}; ++i_; return;
            case '|': tok_ = {Tok::Or, "|", pos}; ++i_; return;
            case '-':
                if (i_ + 1 < s_.size() && s_[i_ + 1] == '>') {
                    tok_ = {Tok::Implies, "->", pos};
                    i_ += 2;
                    return;
                }
                throw ParseError(pos, "lexical error: '-' is not a token (did you mean '->'?)");
            default:
                throw ParseError(pos, std::string("lexical error: unexpected character '") + c + "'");
        }
    }

    const std::string& s_;
    std::size_t i_ = 0;
    Token tok_{Tok::End, "", 1};
};

class Parser {
public:
    Parser(const std::string& text, const Signature& sig) : lex_(text), sig_(sig) {}

    Formula parse() {
        Formula f = formula();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End) throw ParseError(t.pos, "unexpected input after formula");
        return f;
    }

private:
    Formula formula() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Ident && (t.text == "forall" || t.text == "exists")) {
            Token q = lex_.take();
            std::vector<std::string> vars = varlist();
            expect(Tok::Colon, "expected ':' after quantifier variables");
            for (const std::string& v : vars) bound_.push_back(v);
            Formula body = formula();
            bound_.resize(bound_.size() - vars.size());
            return q.text == "forall" ? forall(std::move(vars), std::move(body))
                                      : exists(std::move(vars), std::move(body));
        }
        return implies_expr();
    }

    std::vector<std::string> varlist() {
        std::vector<std::string> vars;
        for (;;) {
            Token t = lex_.take();
            if (t.kind != Tok::Ident) throw ParseError(t.pos, "expected variable name");
            if (sig_.is_constant(t.text) || sig_.is_function(t.text) || sig_.is_predicate(t.text))
                throw ParseError(t.pos, "quantified variable '" + t.text + "' shadows a declared symbol");
            if (std::find(vars.begin(), vars.end(), t.text) != vars.end())
                throw ParseError(t.pos, "duplicate quantified variable '" + t.text + "'");
            vars.push_back(t.text);
            if (lex_.peek().kind != Tok::Comma) break;
            lex_.take();
        }
        return vars;
    }

    Formula implies_expr() {
        Formula lhs = or_expr();
        if (lex_.peek().kind == Tok::Implies) {
            lex_.take();
            // Right-associative: recurse at the same level; a quantifier on
            // the right binds the remainder.
            Formula rhs = formula();
            return implies(std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    Formula or_expr() {
        Formula f = and_expr();
        while (lex_.peek().kind == Tok::Or) {
            lex_.take();
            f = lor(std::move(f), and_expr());
        }
        return f;
    }

    Formula and_expr() {
        Formula f = unary_expr();
        while (lex_.peek().kind == Tok::And) {
            lex_.take();
            f = land(std::move(f), unary_expr());
        }
        return f;
    }

    Formula unary_expr() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Not) {
            lex_.take();
            return lnot(unary_expr());
        }
        if (t.kind == Tok::LParen) {
            lex_.take();
            Formula f = formula();
            expect(Tok::RParen, "expected ')'");
            return f;
        }
        return atom_expr();
    }

    Formula atom_expr() {
        Token head = lex_.take();
        if (head.kind != Tok::Ident)
            throw ParseError(head.pos, "expected predicate atom, '~', or '('");
        if (!sig_.is_predicate(head.text))
            throw ParseError(head.pos, "unknown predicate symbol '" + head.text + "'");
        expect(Tok::LParen, "expected '(' after predicate symbol");
        std::vector<Term> args;
        for (;;) {
            args.push_back(term());
            if (lex_.peek().kind != Tok::Comma) break;
            lex_.take();
        }
        expect(Tok::RParen, "expected ')'");
        const int arity = sig_.predicate_arity(head.text);
        if (static_cast<int>(args.size()) != arity)
            throw ParseError(head.pos, "arity mismatch: predicate '" + head.text + "' expects " +
                                           std::to_string(arity) + " argument(s), got " +
                                           std::to_string(args.size()));
        return atom(head.text, std::move(args));
    }

    Term term() {
        Token t = lex_.take();
        if (t.kind != Tok::Ident) throw ParseError(t.pos, "expected term");
        if (sig_.is_function(t.text)) {
            expect(Tok::LParen, "expected '(' after function symbol");
            std::vector<Term> args;
            for (;;) {
                args.push_back(term());
                if (lex_.peek().kind != Tok::Comma) break;
                lex_.take();
            }
            expect(Tok::RParen, "expected ')'");
            const int arity = sig_.function_arity(t.text);
            if (static_cast<int>(args.size()) != arity)
                throw ParseError(t.pos, "arity mismatch: function '" + t.text + "' expects " +
                                            std::to_string(arity) + " argument(s), got " +
                                            std::to_string(args.size()));
            return Term::apply(t.text, std::move(args));
        }
        if (is_bound(t.text)) return Term::var(t.text);
        if (sig_.is_constant(t.text)) return Term::constant(t.text);
        if (sig_.is_predicate(t.text))
            throw ParseError(t.pos, "predicate symbol '" + t.text + "' used as a term");
        throw ParseError(t.pos, "unbound variable '" + t.text + "'");
    }

    bool is_bound(const std::string& name) const {
        return std::find(bound_.begin(), bound_.end(), name) != bound_.end();
    }

    void expect(Tok k, const char* msg) {
        Token t = lex_.take();
        if (t.kind != k) throw ParseError(t.pos, msg);
    }

    Lexer lex_;
    const Signature& sig_;
    std::vector<std::string> bound_;
};

}  // namespace

Formula parse_formula(const std::string& text, const Signature& sig) {
    return Parser(text, sig).parse();
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

// Binding strength; quantifiers are weakest because they swallow the rest of
// the clause.
int level(Formula::Kind k) {
    switch (k) {
        case Formula::Kind::ForAll:
        case Formula::Kind::Exists: return 0;
        case Formula::Kind::Implies: return 1;
        case Formula::Kind::Or: return 2;
        case Formula::Kind::And: return 3;
        case Formula::Kind::Not: return 4;
        case Formula::Kind::Atom: return 5;
    }
    return 5;
}

void print_term(const Term& t, std::string& out) {
    out += t.name;
    if (t.kind == Term::Kind::Apply) {
        out += '(';
        for (std::size_t i = 0; i < t.args.size(); ++i) {
            if (i) out += ',';
            print_term(t.args[i], out);
        }
        out += ')';
    }
}

void print_rec(const Formula& f, int parent_level, bool right_assoc_slot, std::string& out) {
    const int mine = level(f.kind);
    bool parens;
    if (f.kind == Formula::Kind::ForAll || f.kind == Formula::Kind::Exists) {
        // A bare quantifier is grammatical only where the full formula rule
        // recurses: at the top, as a quantifier body, or after '->'.
        parens = !(parent_level == 0 || (parent_level == 1 && right_assoc_slot));
    } else {
        parens = mine < parent_level || (mine == parent_level && !right_assoc_slot);
    }
    if (parens) out += '(';
    switch (f.kind) {
        case Formula::Kind::Atom:
            out += f.pred;
            out += '(';
            for (std::size_t i = 0; i < f.terms.size(); ++i) {
                if (i) out += ',';
                print_term(f.terms[i], out);
            }
            out += ')';
            break;
        case Formula::Kind::Not:
            out += '~';
            print_rec(f.kids[0], 4, true, out);
            break;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies: {
            const char* op = f.kind == Formula::Kind::And   ? " & "
                             : f.kind == Formula::Kind::Or  ? " | "
                                                            : " -> ";
            const bool right_assoc = f.kind == Formula::Kind::Implies;
            // Left-assoc ops may chain on the left; implies chains on the right.
            print_rec(f.kids[0], mine, !right_assoc, out);
            out += op;
            print_rec(f.kids[1], mine, right_assoc, out);
            break;
        }
        case Formula::Kind::ForAll:
        case Formula::Kind::Exists:
            out += f.kind == Formula::Kind::ForAll ? "forall " : "exists ";
            for (std::size_t i = 0; i < f.vars.size(); ++i) {
                if (i) out += ',';
                out += f.vars[i];
            }
            out += ": ";
            print_rec(f.kids[0], 0, true, out);
            break;
    }
    if (parens) out += ')';
}

}  // namespace

std::string print_formula(const Formula& f) {
    std::string out;
    print_rec(f, 0, true, out);
    return out;
}

// ---------------------------------------------------------------------------
// Free variables / validation
// ---------------------------------------------------------------------------

namespace {

void term_vars(const Term& t, const std::vector<std::string>& bound,
               std::vector<std::string>& out) {
    if (t.kind == Term::Kind::Variable) {
        if (std::find(bound.begin(), bound.end(), t.name) == bound.end() &&
            std::find(out.begin(), out.end(), t.name) == out.end())
            out.push_back(t.name);
    }
    for (const Term& a : t.args) term_vars(a, bound, out);
}

void free_rec(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out) {
    switch (f.kind) {
        case Formula::Kind::Atom:
            for (const Term& t : f.terms) term_vars(t, bound, out);
            break;
        case Formula::Kind::ForAll:
        case Formula::Kind::Exists: {
            for (const std::string& v : f.vars) bound.push_back(v);
            free_rec(f.kids[0], bound, out);
            bound.resize(bound.size() - f.vars.size());
            break;
        }
        default:
            for (const Formula& k : f.kids) free_rec(k, bound, out);
    }
}

void validate_term(const Term& t, const Signature& sig) {
    switch (t.kind) {
        case Term::Kind::Constant:
            if (!sig.is_constant(t.name))
                throw ParseError(0, "undeclared constant '" + t.name + "'");
            break;
        case Term::Kind::Apply:
            if (!sig.is_function(t.name))
                throw ParseError(0, "undeclared function '" + t.name + "'");
            if (static_cast<int>(t.args.size()) != sig.function_arity(t.name))
                throw ParseError(0, "arity mismatch on function '" + t.name + "'");
            for (const Term& a : t.args) validate_term(a, sig);
            break;
        case Term::Kind::Variable: break;
    }
}

void validate_rec(const Formula& f, const Signature& sig) {
    if (f.kind == Formula::Kind::Atom) {
        if (!sig.is_predicate(f.pred))
            throw ParseError(0, "undeclared predicate '" + f.pred + "'");
        if (static_cast<int>(f.terms.size()) != sig.predicate_arity(f.pred))
            throw ParseError(0, "arity mismatch on predicate '" + f.pred + "'");
        for (const Term& t : f.terms) validate_term(t, sig);
    }
    for (const Formula& k : f.kids) validate_rec(k, sig);
}

}  // namespace

std::vector<std::string> free_variables(const Formula& f) {
    std::vector<std::string> bound, out;
    free_rec(f, bound, out);
    return out;
}

void validate(const Formula& f, const Signature& sig) { validate_rec(f, sig); }

// ---------------------------------------------------------------------------
// Theory files
// ---------------------------------------------------------------------------

Theory load_theory(std::istream& in) {
    Theory th;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        if (auto hash = stripped.find('#'); hash != std::string::npos)
            stripped.resize(hash);
        std::istringstream ss(stripped);
        std::string first;
        if (!(ss >> first)) continue;  // blank or comment-only

        try {
            const bool directive =
                first.size() > 4 && (first.rfind("pred", 0) == 0 || first.rfind("func", 0) == 0) &&
                first.find_first_not_of("0123456789", 4) == std::string::npos;
            if (first == "const") {
                std::string name;
                while (ss >> name) th.sig.add_constant(name);
            } else if (directive) {
                const int arity = std::stoi(first.substr(4));
                std::string name;
                while (ss >> name) {
                    if (first[0] == 'p')
                        th.sig.add_predicate(name, arity);
                    else
                        th.sig.add_function(name, arity);
                }
            } else {
                th.clauses.push_back(parse_formula(stripped, th.sig));
            }
        } catch (const ParseError& e) {
            throw DataError("theory line " + std::to_string(lineno) + ": " + e.what());
        } catch (const std::exception& e) {
            throw DataError("theory line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return th;
}

void write_theory(const Signature& sig, const std::vector<Formula>& clauses, std::ostream& out) {
    if (!sig.constants().empty()) {
        out << "const";
        for (const std::string& c : sig.constants()) out << ' ' << c;
        out << '\n';
    }
    for (const auto& [name, arity] : sig.functions())
        out << "func" << arity << ' ' << name << '\n';
    // Group predicates by arity, keeping declaration order inside each group.
    for (int arity : {1, 2}) {
        bool any = false;
        for (const auto& [name, a] : sig.predicates())
            if (a == arity) any = true;
        if (!any) continue;
        out << "pred" << arity;
        for (const auto& [name, a] : sig.predicates())
            if (a == arity) out << ' ' << name;
        out << '\n';
    }
    for (const Formula& f : clauses) out << print_formula(f) << '\n';
}

}  // namespace rwtn::fol
