#include "trapmark/frontend.hh"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace trapmark {

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

struct SyntaxError {
    std::string message;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(const std::string& text, std::string file) : text_(text), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End) return out;
        }
    }

private:
    char peek(std::size_t k = 0) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        for (;;) {
            if (pos_ >= text_.size()) return;
            char c = peek();
            if (c == '/' && peek(1) == '/') {
                while (pos_ < text_.size() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    Token next() {
        Token t;
        t.span = {file_, line_, col_, 0};
        const std::size_t start = pos_;
        if (pos_ >= text_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = peek();
        if (ident_start(c)) {
            while (ident_char(peek())) advance();
            // Type.state
            if (peek() == '.' && ident_start(peek(1))) {
                advance();
                while (ident_char(peek())) advance();
            }
            t.kind = Tok::Ident;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
            t.kind = Tok::Number;
        } else if (c == '"') {
            advance();
            while (pos_ < text_.size() && peek() != '"' && peek() != '\n') advance();
            if (peek() != '"') throw SyntaxError{"unterminated string literal", t.span};
            advance();
            t.kind = Tok::String;
            t.text = text_.substr(start + 1, pos_ - start - 2);
            t.span.length = static_cast<int>(pos_ - start);
            return t;
        } else {
            static const char* multi[] = {"<->", "->", "!=", "<=", ">="};
            bool matched = false;
            for (const char* m : multi) {
                std::string s(m);
                if (text_.compare(pos_, s.size(), s) == 0) {
                    for (std::size_t i = 0; i < s.size(); ++i) advance();
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                static const std::string single = "{}(),;:.=<>&|!";
                if (single.find(c) == std::string::npos)
                    throw SyntaxError{std::string("unexpected character '") + c + "'", {file_, line_, col_, 1}};
                advance();
            }
            t.kind = Tok::Punct;
        }
        t.text = text_.substr(start, pos_ - start);
        t.span.length = static_cast<int>(pos_ - start);
        return t;
    }

    const std::string& text_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

const std::set<std::string> kKeywords = {"exists", "forall", "exists2", "forall2", "true", "false", "succ",
                                         "inf",    "sup",    "even",    "mod"};

class Parser {
public:
    Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
        gensym_ = NameSupply("_v");
        for (const auto& t : toks_)
            if (t.kind == Tok::Ident) gensym_.avoid(t.text);
    }

    SystemModel document() {
        SystemModel m;
        bool have_interaction = false;
        if (at_end()) throw SyntaxError{"expected component declaration", cur().span};
        while (!at_end()) {
            const Token& t = cur();
            if (is_word("component")) {
                m.types.push_back(component());
            } else if (is_word("interaction")) {
                if (have_interaction) throw SyntaxError{"duplicate interaction declaration", t.span};
                ++pos_;
                m.interaction_span = cur().span;
                m.interaction = formula().with_span(m.interaction_span);
                expect(";");
                have_interaction = true;
            } else if (is_word("property")) {
                m.properties.push_back(property());
            } else if (is_word("window")) {
                m.windows.push_back(window());
            } else {
                throw SyntaxError{m.types.empty() ? "expected component declaration"
                                                  : "expected component, interaction, property or window declaration",
                                  t.span};
            }
        }
        if (m.types.empty()) throw SyntaxError{"expected component declaration", cur().span};
        if (!have_interaction) throw SyntaxError{"missing interaction declaration", cur().span};
        return m;
    }

    Formula standalone_formula() {
        Formula f = formula();
        if (!at_end()) throw SyntaxError{"unexpected '" + cur().text + "' after formula", cur().span};
        return f;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    bool at_end() const { return cur().kind == Tok::End; }
    bool is_punct(const std::string& p) const { return cur().kind == Tok::Punct && cur().text == p; }
    bool is_word(const std::string& w) const { return cur().kind == Tok::Ident && cur().text == w; }

    void expect(const std::string& p) {
        if (!is_punct(p)) throw SyntaxError{"expected '" + p + "'" + found(), cur().span};
        ++pos_;
    }
    void expect_word(const std::string& w) {
        if (!is_word(w)) throw SyntaxError{"expected '" + w + "'" + found(), cur().span};
        ++pos_;
    }
    std::string found() const { return at_end() ? " at end of input" : ", found '" + cur().text + "'"; }

    std::string identifier(const std::string& what) {
        if (cur().kind != Tok::Ident || kKeywords.count(cur().text))
            throw SyntaxError{"expected " + what + found(), cur().span};
        return toks_[pos_++].text;
    }

    std::string plain_identifier(const std::string& what) {
        const Token& t = cur();
        std::string s = identifier(what);
        if (s.find('.') != std::string::npos) throw SyntaxError{what + " may not contain '.'", t.span};
        return s;
    }

    int number() {
        if (cur().kind != Tok::Number) throw SyntaxError{"expected a number" + found(), cur().span};
        const Token& t = toks_[pos_++];
        if (t.text.size() > 9) throw SyntaxError{"number too large", t.span};
        return std::stoi(t.text);
    }

    ComponentType component() {
        ComponentType c;
        c.span = cur().span;
        expect_word("component");
        c.name = plain_identifier("component type name");
        expect("{");
        bool have_states = false;
        while (!is_punct("}")) {
            if (is_word("states")) {
                if (have_states) throw SyntaxError{"duplicate states clause", cur().span};
                ++pos_;
                c.states.push_back(plain_identifier("state name"));
                while (is_punct(",")) {
                    ++pos_;
                    c.states.push_back(plain_identifier("state name"));
                }
                expect_word("init");
                c.initial = plain_identifier("initial state");
                expect(";");
                have_states = true;
            } else if (is_word("port")) {
                PortDecl p;
                p.span = cur().span;
                ++pos_;
                p.name = plain_identifier("port name");
                if (is_punct(":")) {
                    ++pos_;
                    p.source = plain_identifier("source state");
                    expect("->");
                    p.target = plain_identifier("target state");
                }
                expect(";");
                c.ports.push_back(std::move(p));
            } else {
                throw SyntaxError{"expected 'states', 'port' or '}'" + found(), cur().span};
            }
        }
        expect("}");
        if (!have_states) throw SyntaxError{"component '" + c.name + "' lacks a states clause", c.span};
        return c;
    }

    PropertySpec property() {
        PropertySpec p;
        p.span = cur().span;
        expect_word("property");
        if (is_word("deadlock")) {
            ++pos_;
            p.kind = PropertyKind::Deadlock;
            p.name = "deadlock";
        } else if (is_word("bad")) {
            ++pos_;
            p.kind = PropertyKind::BadStates;
            if (cur().kind != Tok::String) throw SyntaxError{"expected property name string" + found(), cur().span};
            p.name = toks_[pos_++].text;
            expect(":");
            p.bad_states = formula();
        } else {
            throw SyntaxError{"expected 'deadlock' or 'bad'" + found(), cur().span};
        }
        expect(";");
        return p;
    }

    WindowSpec window() {
        WindowSpec w;
        w.span = cur().span;
        expect_word("window");
        if (cur().kind != Tok::String) throw SyntaxError{"expected window name string" + found(), cur().span};
        w.name = toks_[pos_++].text;
        expect("(");
        for (;;) {
            WindowConstant c;
            c.name = plain_identifier("window constant");
            expect(":");
            c.type = plain_identifier("component type");
            w.constants.push_back(std::move(c));
            if (is_punct(",")) {
                ++pos_;
                continue;
            }
            break;
        }
        expect(")");
        expect_word("where");
        w.constraint = formula();
        expect(";");
        return w;
    }

    // ---- formulas

    Formula formula() { return iff(); }

    Formula iff() {
        Formula a = implication();
        while (is_punct("<->")) {
            ++pos_;
            a = Formula::iff(a, implication());
        }
        return a;
    }

    Formula implication() {
        Formula a = disjunction();
        if (is_punct("->")) {
            ++pos_;
            return Formula::implies(a, implication());
        }
        return a;
    }

    Formula disjunction() {
        Formula a = conjunction();
        while (is_punct("|")) {
            ++pos_;
            a = Formula::disj(a, conjunction());
        }
        return a;
    }

    Formula conjunction() {
        Formula a = unary();
        while (is_punct("&")) {
            ++pos_;
            a = Formula::conj(a, unary());
        }
        return a;
    }

    Formula unary() {
        if (is_punct("!")) {
            ++pos_;
            return Formula::negate(unary());
        }
        if (is_word("exists") || is_word("forall") || is_word("exists2") || is_word("forall2")) {
            const std::string q = toks_[pos_++].text;
            const bool second = q.back() == '2';
            std::string v = plain_identifier("bound variable");
            expect(".");
            auto& scope = second ? sets_ : vars_;
            scope.push_back(v);
            Formula body = formula();
            scope.pop_back();
            if (q == "exists") return Formula::exists(v, body);
            if (q == "forall") return Formula::forall(v, body);
            if (q == "exists2") return Formula::exists_set(v, body);
            return Formula::forall_set(v, body);
        }
        return atom();
    }

    bool bound(const std::vector<std::string>& scope, const std::string& n) const {
        for (const auto& s : scope)
            if (s == n) return true;
        return false;
    }

    Formula atom() {
        const SourceSpan span = cur().span;
        if (is_punct("(")) {
            ++pos_;
            Formula f = formula();
            expect(")");
            return f;
        }
        if (is_word("true")) {
            ++pos_;
            return Formula::truth();
        }
        if (is_word("false")) {
            ++pos_;
            return Formula::falsity();
        }
        if (cur().kind == Tok::Ident && toks_[pos_ + 1].kind == Tok::Punct && toks_[pos_ + 1].text == "(" &&
            cur().text != "succ") {
            const std::string name = toks_[pos_].text;
            pos_ += 2;
            if (name == "mod") {
                Term t = term();
                expect(",");
                int k = number();
                expect(",");
                int l = number();
                expect(")");
                if (k < 1 || l >= k) throw SyntaxError{"mod(t, k, l) requires k >= 1 and 0 <= l < k", span};
                return Formula::mod(t, k, l).with_span(span);
            }
            Term t = term();
            expect(")");
            if (name == "even") return Formula::mod(t, 2, 0).with_span(span);
            if (name == "inf" || name == "sup") {
                std::string y = gensym_.fresh();
                Formula cmp = name == "inf" ? Formula::leq(t, Term::var(y)) : Formula::leq(Term::var(y), t);
                return Formula::forall(y, cmp.with_span(span));
            }
            if (kKeywords.count(name)) throw SyntaxError{"'" + name + "' cannot be used as a predicate", span};
            if (bound(sets_, name)) return Formula::member(name, t).with_span(span);
            return Formula::pred(name, t).with_span(span);
        }
        Term a = term();
        if (cur().kind != Tok::Punct) throw SyntaxError{"expected a comparison operator" + found(), cur().span};
        const std::string op = cur().text;
        static const std::set<std::string> cmps = {"=", "!=", "<=", "<", ">=", ">"};
        if (!cmps.count(op)) throw SyntaxError{"expected a comparison operator" + found(), cur().span};
        ++pos_;
        Term b = term();
        SourceSpan full = span;
        Formula f;
        if (op == "=") f = Formula::eq(a, b);
        else if (op == "!=") return Formula::negate(Formula::eq(a, b).with_span(full));
        else if (op == "<=") f = Formula::leq(a, b);
        else if (op == "<") f = Formula::lt(a, b);
        else if (op == ">=") f = Formula::leq(b, a);
        else f = Formula::lt(b, a);
        return f.with_span(full);
    }

    Term term() {
        if (is_word("succ")) {
            ++pos_;
            expect("(");
            Term t = term();
            expect(")");
            return t.succ();
        }
        if (cur().kind == Tok::Number) {
            const Token& t = cur();
            if (t.text != "0") throw SyntaxError{"only the constant 0 is a numeric term", t.span};
            ++pos_;
            return Term::zero();
        }
        const Token& t = cur();
        std::string n = plain_identifier("a term");
        if (bound(sets_, n)) throw SyntaxError{"set variable '" + n + "' used as a term", t.span};
        if (bound(vars_, n)) return Term::var(n);
        return Term::constant(n);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<std::string> vars_;
    std::vector<std::string> sets_;
    NameSupply gensym_;
};

// Maps bare state names to qualified ones where unambiguous; reports
// ambiguous bare names.
struct StateResolver {
    std::map<std::string, std::string> bare_to_qualified;
    std::set<std::string> ambiguous;

    explicit StateResolver(const SystemModel& m) {
        std::set<std::string> ports;
        for (const auto& p : port_names(m)) ports.insert(p);
        std::map<std::string, int> count;
        for (const auto& t : m.types)
            for (const auto& s : t.states) ++count[s];
        for (const auto& t : m.types)
            for (const auto& s : t.states) {
                if (ports.count(s)) continue;
                if (count[s] == 1) bare_to_qualified[s] = qualified_state(t.name, s);
                else ambiguous.insert(s);
            }
    }

    void check(const Formula& f, const SourceSpan& fallback) const {
        if (f.op() == Op::Pred && ambiguous.count(f.name()))
            throw SyntaxError{"state name '" + f.name() + "' is ambiguous; write Type." + f.name(),
                              f.span().file.empty() && f.span().line == 1 && f.span().column == 1 ? fallback
                                                                                                   : f.span()};
        for (const auto& k : f.kids()) check(k, fallback);
    }

    Formula resolve(const Formula& f, const SourceSpan& span) const {
        check(f, span);
        return rename_predicates(f, bare_to_qualified);
    }
};

Diagnostic syntax_diag(const SyntaxError& e) {
    return {Diagnostic::Severity::Error, "syntax", e.message, e.span};
}

}  // namespace

Formula rename_predicates(const Formula& f, const std::map<std::string, std::string>& names) {
    if (f.op() == Op::Pred) {
        auto it = names.find(f.name());
        if (it == names.end()) return f;
        return Formula::pred(it->second, f.terms()[0]).with_span(f.span());
    }
    if (f.kids().empty()) return f;
    auto node = std::make_shared<FormulaNode>(*f.get());
    for (auto& k : node->kids) k = rename_predicates(k, names);
    return Formula(std::move(node));
}

ParseResult parse_model(const std::string& text, const std::string& file) {
    ParseResult r;
    try {
        Lexer lx(text, file);
        Parser p(lx.run());
        SystemModel m = p.document();
        StateResolver res(m);
        m.interaction = res.resolve(m.interaction, m.interaction_span).with_span(m.interaction_span);
        for (auto& pr : m.properties)
            if (pr.bad_states) pr.bad_states = res.resolve(*pr.bad_states, pr.span);
        r.model = std::move(m);
    } catch (const SyntaxError& e) {
        r.diagnostics.push_back(syntax_diag(e));
    }
    return r;
}

FormulaParse parse_formula(const std::string& text, const SystemModel* model) {
    FormulaParse r;
    try {
        Lexer lx(text, "");
        Parser p(lx.run());
        Formula f = p.standalone_formula();
        if (model) f = StateResolver(*model).resolve(f, {});
        r.formula = f;
    } catch (const SyntaxError& e) {
        r.diagnostics.push_back(syntax_diag(e));
    }
    return r;
}

std::string print_formula(const Formula& f, const SystemModel& model) {
    StateResolver res(model);
    std::map<std::string, std::string> shorten;
    for (const auto& [bare, q] : res.bare_to_qualified) shorten[q] = bare;
    return to_string(rename_predicates(f, shorten));
}

std::string pretty_print(const SystemModel& model) {
    std::ostringstream os;
    for (const auto& t : model.types) {
        os << "component " << t.name << " {\n    states ";
        for (std::size_t i = 0; i < t.states.size(); ++i) os << (i ? ", " : "") << t.states[i];
        os << " init " << t.initial << ";\n";
        for (const auto& p : t.ports) {
            os << "    port " << p.name;
            if (p.has_rule()) os << ": " << *p.source << " -> " << *p.target;
            os << ";\n";
        }
        os << "}\n\n";
    }
    os << "interaction " << print_formula(model.interaction, model) << ";\n";
    if (!model.properties.empty()) os << '\n';
    for (const auto& p : model.properties) {
        if (p.kind == PropertyKind::Deadlock) os << "property deadlock;\n";
        else os << "property bad \"" << p.name << "\": " << print_formula(*p.bad_states, model) << ";\n";
    }
    if (!model.windows.empty()) os << '\n';
    for (const auto& w : model.windows) {
        os << "window \"" << w.name << "\" (";
        for (std::size_t i = 0; i < w.constants.size(); ++i)
            os << (i ? ", " : "") << w.constants[i].name << ": " << w.constants[i].type;
        os << ") where " << to_string(w.constraint) << ";\n";
    }
    return os.str();
}

}  // namespace trapmark
