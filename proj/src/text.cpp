#include "measinf/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace measinf::text {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    [[noreturn]] void fail(const std::string& what) const {
        // column of pos_
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < pos_ && k < s_.size(); ++k) {
            if (s_[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ParseError, what, line, col);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip_ws();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
        if (b == pos_) fail("expected a name");
        return std::string(s_.substr(b, pos_ - b));
    }

    void keyword(std::string_view name) {
        const std::size_t at = (skip_ws(), pos_);
        if (ident() != name) {
            pos_ = at;
            fail("expected '" + std::string(name) + "'");
        }
    }

    /// Optional `name=`; returns false (position unchanged) when the next
    /// identifier is not `name`.
    bool accept_key(std::string_view name) {
        skip_ws();
        const std::size_t at = pos_;
        std::size_t e = pos_;
        while (e < s_.size() && is_ident_char(s_[e])) ++e;
        if (s_.substr(at, e - at) != name) return false;
        pos_ = e;
        expect('=');
        return true;
    }

    void key(std::string_view name) {
        if (!accept_key(name)) fail("expected '" + std::string(name) + "='");
    }

    double number() {
        skip_ws();
        const char* b = s_.data() + pos_;
        const char* e = s_.data() + s_.size();
        if (b < e && *b == '+') ++b;
        double v = 0.0;
        const auto r = std::from_chars(b, e, v);
        if (r.ec != std::errc() || r.ptr == b) fail("expected a number");
        pos_ = static_cast<std::size_t>(r.ptr - s_.data());
        if (!std::isfinite(v)) fail("number must be finite");
        return v;
    }

    std::size_t index() {
        const std::size_t at = (skip_ws(), pos_);
        const double v = number();
        if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) {
            pos_ = at;
            fail("expected a non-negative integer");
        }
        return static_cast<std::size_t>(v);
    }

    std::vector<double> number_list() {
        expect('[');
        std::vector<double> out;
        if (accept(']')) return out;
        do out.push_back(number());
        while (accept(','));
        expect(']');
        return out;
    }

    std::vector<std::size_t> index_list() {
        expect('[');
        std::vector<std::size_t> out;
        if (accept(']')) return out;
        do out.push_back(index());
        while (accept(','));
        expect(']');
        return out;
    }

    TailDescriptor tail() {
        const std::size_t at = (skip_ws(), pos_);
        const std::string tag = ident();
        try {
            if (tag == "Constant") {
                expect('(');
                const double c = number();
                expect(')');
                return Constant{c};
            }
            if (tag == "PowerDrift" || tag == "GeometricDrift") {
                const bool power = tag == "PowerDrift";
                expect('(');
                key("a");
                const double a = number();
                expect(',');
                key(power ? "p" : "q");
                const double param = number();
                double base = 1.0;
                if (accept(',')) {
                    key("base");
                    base = number();
                }
                expect(')');
                if (power) return make_power_drift(a, param, base);
                return make_geometric_drift(a, param, base);
            }
            if (tag == "Periodic") {
                expect('(');
                auto cycle = number_list();
                expect(')');
                return make_periodic(std::move(cycle));
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ParseError) throw;
            pos_ = at;
            fail(e.what());
        }
        pos_ = at;
        fail("unknown tail '" + tag + "'");
    }

    TailedSequence sequence() {
        std::vector<double> prefix;
        if (accept_key("prefix")) {
            prefix = number_list();
            expect(';');
        }
        key("tail");
        TailDescriptor t = tail();
        return {std::move(prefix), std::move(t)};
    }

    TailedSequence braced_sequence() {
        expect('{');
        TailedSequence s = sequence();
        expect('}');
        return s;
    }

    Parallelepiped parallelepiped() {
        const std::size_t at = (skip_ws(), pos_);
        key("lower");
        TailedSequence lo = braced_sequence();
        expect(';');
        key("upper");
        TailedSequence hi = braced_sequence();
        try {
            return {std::move(lo), std::move(hi)};
        } catch (const Error& e) {
            pos_ = at;
            fail(e.what());
        }
    }

    ProductFunction function() {
        const std::size_t at = (skip_ws(), pos_);
        const std::string tag = ident();
        expect('(');
        try {
            if (tag == "Linear") {
                key("weights");
                TailedSequence w = braced_sequence();
                double offset = 0.0;
                if (accept(';')) {
                    key("offset");
                    offset = number();
                }
                expect(')');
                return make_linear_tail(std::move(w), offset);
            }
            if (tag == "Indicator") {
                key("box");
                expect('{');
                Parallelepiped box = parallelepiped();
                expect('}');
                double scale = 1.0;
                if (accept(';')) {
                    key("scale");
                    scale = number();
                }
                expect(')');
                return Indicator{std::move(box), scale};
            }
            if (tag == "Poly") {
                key("indices");
                auto idx = index_list();
                expect(';');
                key("terms");
                expect('[');
                FiniteCylinder::Polynomial terms;
                if (!accept(']')) {
                    do {
                        const std::size_t term_at = (skip_ws(), pos_);
                        auto row = number_list();
                        if (row.size() != idx.size() + 1) {
                            pos_ = term_at;
                            fail("each term needs a coefficient and one exponent per index");
                        }
                        FiniteCylinder::Monomial m;
                        m.coef = row[0];
                        for (std::size_t k = 1; k < row.size(); ++k) {
                            if (row[k] < 0 || row[k] != std::floor(row[k])) {
                                pos_ = term_at;
                                fail("exponents must be non-negative integers");
                            }
                            m.powers.push_back(static_cast<unsigned>(row[k]));
                        }
                        terms.push_back(std::move(m));
                    } while (accept(','));
                    expect(']');
                }
                expect(')');
                return make_polynomial(std::move(idx), std::move(terms));
            }
            if (tag == "Table") {
                key("indices");
                auto idx = index_list();
                expect(';');
                key("cells");
                const std::size_t cells = index();
                expect(';');
                key("values");
                auto values = number_list();
                expect(')');
                return make_table(std::move(idx), cells, std::move(values));
            }
            if (tag == "Opaque") {
                const std::string name = ident();
                expect(')');
                if (name == "limsup") return limsup_function();
                pos_ = at;
                fail("unknown opaque preset '" + name + "'");
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ParseError) throw;
            pos_ = at;
            fail(e.what());
        }
        pos_ = at;
        fail("unknown function '" + tag + "'");
    }

    void finish() {
        if (!at_end()) fail("unexpected trailing input");
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string format_index_list(const std::vector<std::size_t>& xs) {
    std::string out = "[";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) out += ", ";
        out += std::to_string(xs[k]);
    }
    return out + "]";
}

} // namespace

std::string format_number(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double parse_number(std::string_view s) {
    Parser p(s);
    const double v = p.number();
    p.finish();
    return v;
}

std::string format_number_list(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) out += ", ";
        out += format_number(xs[k]);
    }
    return out + "]";
}

std::vector<double> parse_number_list(std::string_view s) {
    Parser p(s);
    auto v = p.number_list();
    p.finish();
    return v;
}

std::string format(const TailDescriptor& tail) {
    return std::visit(
        overloaded{
            [](const Constant& c) { return "Constant(" + format_number(c.value) + ")"; },
            [](const PowerDrift& d) {
                std::string s = "PowerDrift(a=" + format_number(d.a) + ", p=" + format_number(d.p);
                if (d.base != 1.0) s += ", base=" + format_number(d.base);
                return s + ")";
            },
            [](const GeometricDrift& d) {
                std::string s = "GeometricDrift(a=" + format_number(d.a) + ", q=" + format_number(d.q);
                if (d.base != 1.0) s += ", base=" + format_number(d.base);
                return s + ")";
            },
            [](const Periodic& p) { return "Periodic(" + format_number_list(p.cycle) + ")"; },
            [](const Opaque& o) -> std::string {
                throw Error(ErrorCode::OpaqueUnsupported, "opaque tail '" + o.label + "' has no text form");
            },
        },
        tail);
}

std::string format(const TailedSequence& seq) {
    std::string s;
    if (!seq.prefix().empty()) s = "prefix=" + format_number_list(seq.prefix()) + "; ";
    return s + "tail=" + format(seq.tail());
}

std::string format(const Parallelepiped& box) {
    return "lower={" + format(box.lower()) + "}; upper={" + format(box.upper()) + "}";
}

std::string format(const ProductFunction& f) {
    return std::visit(
        overloaded{
            [](const FiniteCylinder& c) -> std::string {
                return std::visit(
                    overloaded{
                        [&](const FiniteCylinder::Polynomial& poly) {
                            std::string s = "Poly(indices=" + format_index_list(c.indices) + "; terms=[";
                            for (std::size_t k = 0; k < poly.size(); ++k) {
                                if (k) s += ", ";
                                std::vector<double> row{poly[k].coef};
                                for (unsigned e : poly[k].powers) row.push_back(e);
                                s += format_number_list(row);
                            }
                            return s + "])";
                        },
                        [&](const FiniteCylinder::Table& t) {
                            return "Table(indices=" + format_index_list(c.indices) +
                                   "; cells=" + std::to_string(t.cells) + "; values=" + format_number_list(t.values) +
                                   ")";
                        },
                        [](const FiniteCylinder::Callable&) -> std::string {
                            throw Error(ErrorCode::OpaqueUnsupported, "callable cylinder has no text form");
                        },
                    },
                    c.form);
            },
            [](const LinearTail& l) {
                std::string s = "Linear(weights={" + format(l.weights) + "}";
                if (l.offset != 0.0) s += "; offset=" + format_number(l.offset);
                return s + ")";
            },
            [](const Indicator& ind) {
                std::string s = "Indicator(box={" + format(ind.box) + "}";
                if (ind.scale != 1.0) s += "; scale=" + format_number(ind.scale);
                return s + ")";
            },
            [](const OpaqueFunction& o) { return "Opaque(" + o.label + ")"; },
        },
        f);
}

TailedSequence parse_sequence(std::string_view s) {
    Parser p(s);
    auto v = p.sequence();
    p.finish();
    return v;
}

Parallelepiped parse_parallelepiped(std::string_view s) {
    Parser p(s);
    auto v = p.parallelepiped();
    p.finish();
    return v;
}

ProductFunction parse_function(std::string_view s) {
    Parser p(s);
    auto v = p.function();
    p.finish();
    return v;
}

} // namespace measinf::text
