#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json_io.hpp"

namespace blens::dsl {

// ------------------------------------------------------------- Lexing

struct Token {
    enum class Kind { ident, keyword, number, punct, eof };
    Kind kind;
    std::string text;
    SourcePos pos;
};

inline bool is_keyword(const std::string& s) {
    static const char* words[] = {"space", "prior",   "channel", "let",    "infer",
                                  "predict", "verify", "laws",    "observe"};
    for (const char* w : words)
        if (s == w) return true;
    return false;
}

/// Tokenizes model text.  '#' starts a comment running to end of line.
inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto pos = [&] { return SourcePos{line, col}; };
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
        SourcePos p = pos();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                      src[j] == '_'))
                ++j;
            std::string word = src.substr(i, j - i);
            advance(j - i);
            out.push_back({is_keyword(word) ? Token::Kind::keyword : Token::Kind::ident,
                           word, p});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && (src[j] == '/' || src[j] == '.')) {
                std::size_t k = j + 1;
                while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                if (k == j + 1)
                    throw SyntaxError("digits expected after '" + std::string(1, src[j]) + "'",
                                      SourcePos{line, col + static_cast<int>(j - i)});
                j = k;
            }
            std::string num = src.substr(i, j - i);
            advance(j - i);
            out.push_back({Token::Kind::number, num, p});
            continue;
        }
        switch (c) {
            case '=': case '{': case '}': case ',': case ':': case '(': case ')': case '|':
                out.push_back({Token::Kind::punct, std::string(1, c), p});
                advance(1);
                continue;
            case '-':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    out.push_back({Token::Kind::punct, "->", p});
                    advance(2);
                    continue;
                }
                throw SyntaxError("expected '->'", p);
            case '>':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    out.push_back({Token::Kind::punct, ">>", p});
                    advance(2);
                    continue;
                }
                throw SyntaxError("expected '>>'", p);
            default:
                throw SyntaxError("unexpected character '" + std::string(1, c) + "'", p);
        }
    }
    out.push_back({Token::Kind::eof, "", pos()});
    return out;
}

// ---------------------------------------------------------------- AST

struct NumberLit {
    std::string text;  // kept exactly as written; parsed per numeric mode
    SourcePos pos;
    friend bool operator==(const NumberLit& a, const NumberLit& b) { return a.text == b.text; }
};

struct DistLit {
    std::vector<std::pair<std::string, NumberLit>> entries;
    SourcePos pos;
    friend bool operator==(const DistLit& a, const DistLit& b) {
        return a.entries == b.entries;
    }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { ref, seq, tensor };
    Kind kind;
    std::string name;  // ref only
    ExprPtr lhs, rhs;  // seq / tensor
    SourcePos pos;
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    if (a->kind == Expr::Kind::ref) return a->name == b->name;
    return expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
}

struct SpaceDecl {
    std::string name;
    std::vector<std::string> elements;
    SourcePos pos;
    friend bool operator==(const SpaceDecl& a, const SpaceDecl& b) {
        return a.name == b.name && a.elements == b.elements;
    }
};

struct PriorDecl {
    std::string name;
    std::string space;
    DistLit value;
    SourcePos pos;
    friend bool operator==(const PriorDecl& a, const PriorDecl& b) {
        return a.name == b.name && a.space == b.space && a.value == b.value;
    }
};

struct ChannelRow {
    std::string element;
    DistLit value;
    SourcePos pos;
    friend bool operator==(const ChannelRow& a, const ChannelRow& b) {
        return a.element == b.element && a.value == b.value;
    }
};

struct ChannelDecl {
    std::string name;
    std::string dom;
    std::string cod;
    std::vector<ChannelRow> rows;
    SourcePos pos;
    friend bool operator==(const ChannelDecl& a, const ChannelDecl& b) {
        return a.name == b.name && a.dom == b.dom && a.cod == b.cod && a.rows == b.rows;
    }
};

struct LetDecl {
    std::string name;
    ExprPtr expr;
    SourcePos pos;
    friend bool operator==(const LetDecl& a, const LetDecl& b) {
        return a.name == b.name && expr_equal(a.expr, b.expr);
    }
};

enum class QueryKind { infer, predict, verify, laws };

inline const char* query_kind_name(QueryKind k) {
    switch (k) {
        case QueryKind::infer: return "infer";
        case QueryKind::predict: return "predict";
        case QueryKind::verify: return "verify";
        case QueryKind::laws: return "laws";
    }
    return "?";
}

struct Query {
    QueryKind kind;
    ExprPtr pipeline;
    std::string prior;
    std::string observation;  // infer only; may be a pair label "(a,b)"
    SourcePos pos;
    friend bool operator==(const Query& a, const Query& b) {
        return a.kind == b.kind && expr_equal(a.pipeline, b.pipeline) &&
               a.prior == b.prior && a.observation == b.observation;
    }
};

using Statement = std::variant<SpaceDecl, PriorDecl, ChannelDecl, LetDecl, Query>;

struct ModelAst {
    std::vector<Statement> statements;
    friend bool operator==(const ModelAst& a, const ModelAst& b) {
        return a.statements == b.statements;
    }
};

// -------------------------------------------------------------- Parser

namespace detail {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ModelAst parse() {
        ModelAst model;
        while (!at_eof()) model.statements.push_back(statement());
        return model;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& get() { return toks_[i_++]; }
    bool at_eof() const { return peek().kind == Token::Kind::eof; }

    bool is_punct(const char* p) const {
        return peek().kind == Token::Kind::punct && peek().text == p;
    }
    bool is_kw(const char* k) const {
        return peek().kind == Token::Kind::keyword && peek().text == k;
    }
    void expect_punct(const char* p) {
        if (!is_punct(p))
            throw SyntaxError("expected '" + std::string(p) + "', found '" + peek().text + "'",
                              peek().pos);
        get();
    }
    void expect_kw(const char* k) {
        if (!is_kw(k))
            throw SyntaxError("expected '" + std::string(k) + "', found '" + peek().text + "'",
                              peek().pos);
        get();
    }
    Token expect_ident(const char* what) {
        if (peek().kind != Token::Kind::ident)
            throw SyntaxError("expected " + std::string(what) + ", found '" + peek().text + "'",
                              peek().pos);
        return get();
    }
    Token expect_number() {
        if (peek().kind != Token::Kind::number)
            throw SyntaxError("expected a number, found '" + peek().text + "'", peek().pos);
        return get();
    }

    void declare(std::vector<std::string>& table, const std::string& name, SourcePos pos,
                 const char* kind) {
        for (const auto& n : table)
            if (n == name)
                throw DuplicateName(std::string(kind) + " \"" + name + "\" is already declared",
                                    pos);
        table.push_back(name);
    }
    static bool declared(const std::vector<std::string>& table, const std::string& name) {
        for (const auto& n : table)
            if (n == name) return true;
        return false;
    }
    void require_declared(const std::vector<std::string>& table, const std::string& name,
                          SourcePos pos, const char* kind) {
        if (!declared(table, name))
            throw ForwardReference(std::string(kind) + " \"" + name +
                                   "\" is not declared at this point", pos);
    }

    Statement statement() {
        const Token& t = peek();
        if (t.kind != Token::Kind::keyword)
            throw SyntaxError("expected a declaration or query, found '" + t.text + "'", t.pos);
        if (t.text == "space") return space_decl();
        if (t.text == "prior") return prior_decl();
        if (t.text == "channel") return channel_decl();
        if (t.text == "let") return let_decl();
        if (t.text == "infer" || t.text == "predict" || t.text == "verify" ||
            t.text == "laws")
            return query();
        throw SyntaxError("unexpected keyword '" + t.text + "'", t.pos);
    }

    Statement space_decl() {
        SourcePos pos = get().pos;  // "space"
        Token name = expect_ident("a space name");
        declare(spaces_, name.text, name.pos, "space");
        expect_punct("=");
        expect_punct("{");
        std::vector<std::string> elems;
        elems.push_back(expect_ident("an element").text);
        while (is_punct(",")) {
            get();
            elems.push_back(expect_ident("an element").text);
        }
        expect_punct("}");
        return SpaceDecl{name.text, std::move(elems), pos};
    }

    DistLit dist_lit() {
        SourcePos pos = peek().pos;
        expect_punct("{");
        DistLit lit;
        lit.pos = pos;
        auto entry = [&] {
            Token elem = expect_ident("an element");
            expect_punct(":");
            Token num = expect_number();
            lit.entries.emplace_back(elem.text, NumberLit{num.text, num.pos});
        };
        entry();
        while (is_punct(",")) { get(); entry(); }
        expect_punct("}");
        return lit;
    }

    Statement prior_decl() {
        SourcePos pos = get().pos;  // "prior"
        Token name = expect_ident("a prior name");
        declare(priors_, name.text, name.pos, "prior");
        expect_punct(":");
        Token space = expect_ident("a space name");
        require_declared(spaces_, space.text, space.pos, "space");
        expect_punct("=");
        DistLit value = dist_lit();
        return PriorDecl{name.text, space.text, std::move(value), pos};
    }

    Statement channel_decl() {
        SourcePos pos = get().pos;  // "channel"
        Token name = expect_ident("a channel name");
        declare(channels_, name.text, name.pos, "channel");
        expect_punct(":");
        Token dom = expect_ident("a space name");
        require_declared(spaces_, dom.text, dom.pos, "space");
        expect_punct("->");
        Token cod = expect_ident("a space name");
        require_declared(spaces_, cod.text, cod.pos, "space");
        expect_punct("=");
        expect_punct("{");
        std::vector<ChannelRow> rows;
        auto row = [&] {
            Token elem = expect_ident("a domain element");
            SourcePos rpos = elem.pos;
            expect_punct("->");
            rows.push_back(ChannelRow{elem.text, dist_lit(), rpos});
        };
        row();
        while (is_punct(",")) { get(); row(); }
        expect_punct("}");
        return ChannelDecl{name.text, dom.text, cod.text, std::move(rows), pos};
    }

    Statement let_decl() {
        SourcePos pos = get().pos;  // "let"
        Token name = expect_ident("a name");
        declare(channels_, name.text, name.pos, "channel");
        expect_punct("=");
        ExprPtr e = expr();
        return LetDecl{name.text, std::move(e), pos};
    }

    // expr := seq_chain ('|' seq_chain)*      (tensor binds loosest)
    // seq_chain := atom ('>>' atom)*          (left-associative)
    // atom := IDENT | '(' expr ')'
    ExprPtr expr() {
        ExprPtr left = seq_chain();
        while (is_punct("|")) {
            SourcePos pos = get().pos;
            ExprPtr right = seq_chain();
            left = std::make_shared<Expr>(Expr{Expr::Kind::tensor, "", left, right, pos});
        }
        return left;
    }

    ExprPtr seq_chain() {
        ExprPtr left = atom();
        while (is_punct(">>")) {
            SourcePos pos = get().pos;
            ExprPtr right = atom();
            left = std::make_shared<Expr>(Expr{Expr::Kind::seq, "", left, right, pos});
        }
        return left;
    }

    ExprPtr atom() {
        if (is_punct("(")) {
            get();
            ExprPtr inner = expr();
            expect_punct(")");
            return inner;
        }
        Token name = expect_ident("a channel name");
        require_declared(channels_, name.text, name.pos, "channel");
        return std::make_shared<Expr>(Expr{Expr::Kind::ref, name.text, nullptr, nullptr,
                                           name.pos});
    }

    // observation := IDENT | '(' observation ',' observation ')'
    std::string observation() {
        if (is_punct("(")) {
            get();
            std::string l = observation();
            expect_punct(",");
            std::string r = observation();
            expect_punct(")");
            return "(" + l + "," + r + ")";
        }
        return expect_ident("an observation").text;
    }

    Statement query() {
        Token kw = get();
        QueryKind kind = kw.text == "infer"     ? QueryKind::infer
                         : kw.text == "predict" ? QueryKind::predict
                         : kw.text == "verify"  ? QueryKind::verify
                                                : QueryKind::laws;
        ExprPtr pipeline = expr();
        expect_kw("prior");
        Token prior = expect_ident("a prior name");
        require_declared(priors_, prior.text, prior.pos, "prior");
        std::string obs;
        if (kind == QueryKind::infer) {
            expect_kw("observe");
            obs = observation();
        }
        return Query{kind, std::move(pipeline), prior.text, std::move(obs), kw.pos};
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    // Names declared so far.  Channels and lets share one namespace: both
    // denote channels inside pipeline expressions.
    std::vector<std::string> spaces_, priors_, channels_;
};

} // namespace detail

/// Parses model text to an AST.  Grammar errors raise SyntaxError; name
/// errors raise DuplicateName (within a kind) or ForwardReference (every
/// name must be declared before use).
inline ModelAst parse_model(const std::string& source) {
    return detail::Parser(lex(source)).parse();
}

// ------------------------------------------------------------- Printer

namespace detail {

inline void print_expr(std::string& out, const ExprPtr& e, int min_prec) {
    // precedence: tensor = 1, seq = 2, ref = 3; both operators associate
    // to the left, so a right child at the same level needs parentheses.
    int prec = e->kind == Expr::Kind::ref ? 3 : e->kind == Expr::Kind::seq ? 2 : 1;
    bool parens = prec < min_prec;
    if (parens) out += "(";
    switch (e->kind) {
        case Expr::Kind::ref:
            out += e->name;
            break;
        case Expr::Kind::seq:
            print_expr(out, e->lhs, 2);
            out += " >> ";
            print_expr(out, e->rhs, 3);
            break;
        case Expr::Kind::tensor:
            print_expr(out, e->lhs, 1);
            out += " | ";
            print_expr(out, e->rhs, 2);
            break;
    }
    if (parens) out += ")";
}

inline std::string dist_lit_text(const DistLit& lit) {
    std::string out = "{";
    bool first = true;
    for (const auto& [elem, num] : lit.entries) {
        if (!first) out += ", ";
        first = false;
        out += elem + ": " + num.text;
    }
    out += "}";
    return out;
}

} // namespace detail

/// Expression text with minimal parentheses.
inline std::string expr_text(const ExprPtr& e) {
    std::string out;
    detail::print_expr(out, e, 1);
    return out;
}

/// Canonical printer.  Printing a parsed model and reparsing yields a
/// structurally identical AST, and a second print is byte-identical.
inline std::string print_model(const ModelAst& model) {
    std::string out = "# pipelines execute left to right: in c >> d, c runs first, then d\n";
    for (const auto& st : model.statements) {
        if (const auto* s = std::get_if<SpaceDecl>(&st)) {
            out += "space " + s->name + " = {";
            for (std::size_t i = 0; i < s->elements.size(); ++i) {
                if (i) out += ", ";
                out += s->elements[i];
            }
            out += "}\n";
        } else if (const auto* p = std::get_if<PriorDecl>(&st)) {
            out += "prior " + p->name + " : " + p->space + " = " +
                   detail::dist_lit_text(p->value) + "\n";
        } else if (const auto* c = std::get_if<ChannelDecl>(&st)) {
            out += "channel " + c->name + " : " + c->dom + " -> " + c->cod + " = {\n";
            for (std::size_t i = 0; i < c->rows.size(); ++i) {
                out += "  " + c->rows[i].element + " -> " +
                       detail::dist_lit_text(c->rows[i].value);
                if (i + 1 < c->rows.size()) out += ",";
                out += "\n";
            }
            out += "}\n";
        } else if (const auto* l = std::get_if<LetDecl>(&st)) {
            out += "let " + l->name + " = " + expr_text(l->expr) + "\n";
        } else if (const auto* q = std::get_if<Query>(&st)) {
            out += std::string(query_kind_name(q->kind)) + " " + expr_text(q->pipeline) +
                   " prior " + q->prior;
            if (q->kind == QueryKind::infer) out += " observe " + q->observation;
            out += "\n";
        }
    }
    return out;
}

// ----------------------------------------------------------- Validator

/// A validated, typed model: every declaration realized as a semantic
/// value, every query type-checked against its pipeline.
template <class T>
struct Model {
    std::vector<std::pair<std::string, Space>> spaces;
    std::vector<std::pair<std::string, Dist<T>>> priors;
    std::vector<std::pair<std::string, Channel<T>>> channels;  // declared and let-bound
    struct TypedQuery {
        QueryKind kind;
        std::string pipeline_text;
        Channel<T> pipeline;
        std::vector<Channel<T>> factors;  // top-level '>>' factors, lets inlined
        std::string prior_name;
        Dist<T> prior;
        std::string observation;  // infer only
        SourcePos pos;
    };
    std::vector<TypedQuery> queries;

    const Space& space(const std::string& name) const {
        for (const auto& [n, s] : spaces)
            if (n == name) return s;
        throw UnknownElement("no space named \"" + name + "\"");
    }
    const Dist<T>& prior(const std::string& name) const {
        for (const auto& [n, d] : priors)
            if (n == name) return d;
        throw UnknownElement("no prior named \"" + name + "\"");
    }
    const Channel<T>& channel(const std::string& name) const {
        for (const auto& [n, c] : channels)
            if (n == name) return c;
        throw UnknownElement("no channel named \"" + name + "\"");
    }
};

namespace detail {

inline std::string positioned(const std::string& msg, SourcePos pos) {
    return at_pos(pos) + ": " + msg;
}

/// Re-raises library errors from inside a declaration with the
/// declaration's source position folded into the message.
template <class Fn>
auto with_pos(SourcePos pos, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const NotNormalized& e) { throw NotNormalized(positioned(e.what(), pos));
    } catch (const UnknownElement& e) { throw UnknownElement(positioned(e.what(), pos));
    } catch (const NegativeMass& e) { throw NegativeMass(positioned(e.what(), pos));
    } catch (const SpaceMismatch& e) { throw SpaceMismatch(positioned(e.what(), pos));
    } catch (const MissingRow& e) { throw MissingRow(positioned(e.what(), pos));
    } catch (const PositionedError&) { throw;
    } catch (const EmptyPushforward&) { throw;
    } catch (const Error& e) { throw Error(positioned(e.what(), pos)); }
}

template <class T>
Dist<T> realize_dist(const DistLit& lit, const Space& space, const T& norm_eps) {
    std::vector<std::pair<std::string, T>> masses;
    masses.reserve(lit.entries.size());
    for (const auto& [elem, num] : lit.entries)
        masses.emplace_back(elem, with_pos(num.pos, [&] {
                                return scalar_traits<T>::parse(num.text);
                            }));
    return Dist<T>::make(space, masses, norm_eps);
}

template <class T>
Channel<T> eval_expr(const Model<T>& model, const ExprPtr& e) {
    switch (e->kind) {
        case Expr::Kind::ref:
            return model.channel(e->name);
        case Expr::Kind::seq:
            return with_pos(e->pos, [&] {
                return seq_compose(eval_expr(model, e->lhs), eval_expr(model, e->rhs));
            });
        case Expr::Kind::tensor:
            return tensor(eval_expr(model, e->lhs), eval_expr(model, e->rhs));
    }
    throw Error("eval_expr: bad node");
}

/// Flattens the top-level sequential chain of an expression, inlining
/// let-bound names, so that every '>>' split of the pipeline is visible.
/// Tensor nodes are treated as atomic factors.
template <class T>
void seq_factors(const Model<T>& model, const ModelAst& ast, const ExprPtr& e,
                 std::vector<Channel<T>>& out) {
    if (e->kind == Expr::Kind::seq) {
        seq_factors(model, ast, e->lhs, out);
        seq_factors(model, ast, e->rhs, out);
        return;
    }
    if (e->kind == Expr::Kind::ref) {
        for (const auto& st : ast.statements)
            if (const auto* l = std::get_if<LetDecl>(&st))
                if (l->name == e->name) {
                    seq_factors(model, ast, l->expr, out);
                    return;
                }
    }
    out.push_back(eval_expr(model, e));
}

} // namespace detail

/// Validates an AST into a typed model: builds every space, prior, and
/// channel (normalization, label, and shape errors carry the offending
/// declaration's source position), evaluates let-bound pipelines, and
/// type-checks every query.
template <class T>
Model<T> validate_model(const ModelAst& ast,
                        const T& norm_eps = scalar_traits<T>::norm_eps()) {
    Model<T> model;
    for (const auto& st : ast.statements) {
        if (const auto* s = std::get_if<SpaceDecl>(&st)) {
            detail::with_pos(s->pos, [&] {
                model.spaces.emplace_back(s->name, Space(s->name, s->elements));
                return 0;
            });
        } else if (const auto* p = std::get_if<PriorDecl>(&st)) {
            const Space& sp = model.space(p->space);
            model.priors.emplace_back(p->name, detail::with_pos(p->pos, [&] {
                return detail::realize_dist<T>(p->value, sp, norm_eps);
            }));
        } else if (const auto* c = std::get_if<ChannelDecl>(&st)) {
            const Space& dom = model.space(c->dom);
            const Space& cod = model.space(c->cod);
            std::vector<std::pair<std::string, Dist<T>>> rows;
            for (const auto& row : c->rows)
                rows.emplace_back(row.element, detail::with_pos(row.pos, [&] {
                    return detail::realize_dist<T>(row.value, cod, norm_eps);
                }));
            model.channels.emplace_back(c->name, detail::with_pos(c->pos, [&] {
                return Channel<T>::from_table(dom, cod, rows);
            }));
        } else if (const auto* l = std::get_if<LetDecl>(&st)) {
            model.channels.emplace_back(l->name, detail::eval_expr(model, l->expr));
        } else if (const auto* q = std::get_if<Query>(&st)) {
            Channel<T> pipeline = detail::eval_expr(model, q->pipeline);
            const Dist<T>& prior = model.prior(q->prior);
            detail::with_pos(q->pos, [&] {
                if (prior.space() != pipeline.dom())
                    throw SpaceMismatch("prior \"" + q->prior + "\" lives on " +
                                        prior.space().name() + ", pipeline starts at " +
                                        pipeline.dom().name());
                if (q->kind == QueryKind::infer && !pipeline.cod().find(q->observation))
                    throw UnknownElement("observation \"" + q->observation +
                                         "\" is not an element of " + pipeline.cod().name());
                return 0;
            });
            std::vector<Channel<T>> factors;
            detail::seq_factors(model, ast, q->pipeline, factors);
            model.queries.push_back({q->kind, expr_text(q->pipeline), std::move(pipeline),
                                     std::move(factors), q->prior, prior, q->observation,
                                     q->pos});
        }
    }
    return model;
}

// ------------------------------------------------------------- Running

/// Result of running one query: posteriors/predictions carry a
/// distribution, verify/laws carry a structured report.  `payload` is
/// the JSON rendering either way.
template <class T>
struct QueryResult {
    QueryKind kind;
    std::optional<Dist<T>> dist;
    Json payload;
};

/// Runs one typed query.
///   infer:   Bayesian update of the prior on the observation; raises
///            EmptyPushforward (with the predicted distribution attached)
///            when the observation has zero predicted mass.
///   predict: pushforward of the prior.
///   verify:  checks inversion-of-composite == lens-composite-of-inverses
///            at every '>>' split of the pipeline.
///   laws:    GetPut / PutGet-at-prediction / PutPut search for the
///            pipeline's exact lens at the prior.
template <class T>
QueryResult<T> run_query(const typename Model<T>::TypedQuery& q,
                         const T& eps = scalar_traits<T>::cmp_eps()) {
    using traits = scalar_traits<T>;
    switch (q.kind) {
        case QueryKind::infer: {
            Dist<T> predicted = push_state(q.pipeline, q.prior);
            std::size_t obs = q.pipeline.cod().index_of(q.observation);
            if (predicted.mass(obs) == traits::zero())
                throw EmptyPushforward("observation \"" + q.observation +
                                       "\" has zero predicted mass",
                                       to_json(predicted).dump());
            Dist<T> posterior = invert(q.pipeline, q.prior).channel.row(obs);
            return {q.kind, posterior,
                    Json{{"query", "infer"},
                         {"pipeline", q.pipeline_text},
                         {"prior", q.prior_name},
                         {"observation", q.observation},
                         {"posterior", to_json(posterior)}}};
        }
        case QueryKind::predict: {
            Dist<T> predicted = push_state(q.pipeline, q.prior);
            return {q.kind, predicted,
                    Json{{"query", "predict"},
                         {"pipeline", q.pipeline_text},
                         {"prior", q.prior_name},
                         {"prediction", to_json(predicted)}}};
        }
        case QueryKind::verify: {
            Json splits = Json::array();
            bool all = true;
            for (std::size_t k = 1; k < q.factors.size(); ++k) {
                Channel<T> c = q.factors[0];
                for (std::size_t i = 1; i < k; ++i) c = seq_compose(c, q.factors[i]);
                Channel<T> d = q.factors[k];
                for (std::size_t i = k + 1; i < q.factors.size(); ++i)
                    d = seq_compose(d, q.factors[i]);
                CompositionReport<T> rep = verify_composition(c, d, q.prior, eps);
                all = all && rep.holds;
                Json sj = to_json(rep);
                sj["split_after"] = static_cast<int>(k);
                splits.push_back(sj);
            }
            return {q.kind, std::nullopt,
                    Json{{"query", "verify"},
                         {"pipeline", q.pipeline_text},
                         {"prior", q.prior_name},
                         {"holds", all},
                         {"splits", splits}}};
        }
        case QueryKind::laws: {
            LawReport<T> gp = check_getput(q.pipeline, q.prior, eps);
            LawReport<T> pg =
                check_putget_at(q.pipeline, q.prior, push_state(q.pipeline, q.prior), eps);
            LawReport<T> pp =
                putput_search(q.pipeline, q.prior, traits::ratio(1, 20));
            return {q.kind, std::nullopt,
                    Json{{"query", "laws"},
                         {"pipeline", q.pipeline_text},
                         {"prior", q.prior_name},
                         {"get_put", to_json(gp)},
                         {"put_get_at_prediction", to_json(pg)},
                         {"put_put", to_json(pp)}}};
        }
    }
    throw Error("run_query: bad query kind");
}

/// JSON export of a validated model's declarations.
template <class T>
Json model_to_json(const Model<T>& model) {
    Json spaces = Json::array();
    for (const auto& [name, sp] : model.spaces)
        spaces.push_back(Json{{"name", name}, {"elements", sp.elements()}});
    Json priors = Json::object();
    for (const auto& [name, d] : model.priors) priors[name] = to_json(d);
    Json channels = Json::object();
    for (const auto& [name, c] : model.channels) channels[name] = to_json(c);
    return Json{{"spaces", spaces}, {"priors", priors}, {"channels", channels}};
}

} // namespace blens::dsl
