#include "colanet/xml.hpp"

#include <cctype>

namespace colanet {

const XmlNode* XmlNode::child(std::string_view child_name) const {
    for (const XmlNode& c : children) {
        if (c.name == child_name) return &c;
    }
    return nullptr;
}

std::vector<const XmlNode*> XmlNode::children_named(std::string_view child_name) const {
    std::vector<const XmlNode*> out;
    for (const XmlNode& c : children) {
        if (c.name == child_name) out.push_back(&c);
    }
    return out;
}

const std::string* XmlNode::attr(std::string_view attr_name) const {
    for (const auto& [k, v] : attrs) {
        if (k == attr_name) return &v;
    }
    return nullptr;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    XmlNode parse_document() {
        skip_misc();
        if (eof()) fail("document has no root element");
        XmlNode root = parse_element();
        skip_misc();
        if (!eof()) fail("content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw XmlError(msg, line_); }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    char get() {
        char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
    }

    void skip_until(std::string_view end) {
        while (!eof() && !starts_with(end)) get();
        if (eof()) fail(std::string("unterminated '") + std::string(end) + "'");
        for (std::size_t i = 0; i < end.size(); ++i) get();
    }

    // Whitespace, comments and the declaration/processing instructions.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_until("-->");
            } else if (starts_with("<?")) {
                skip_until("?>");
            } else {
                return;
            }
        }
    }

    std::string parse_name() {
        std::string name;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                c == ':') {
                name += get();
            } else {
                break;
            }
        }
        if (name.empty()) fail("expected a name");
        return name;
    }

    std::string decode_entities(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            auto match = [&](std::string_view ent, char repl) {
                if (raw.substr(i, ent.size()) == ent) {
                    out += repl;
                    i += ent.size() - 1;
                    return true;
                }
                return false;
            };
            if (!match("&amp;", '&') && !match("&lt;", '<') && !match("&gt;", '>') &&
                !match("&quot;", '"') && !match("&apos;", '\'')) {
                fail("unknown entity");
            }
        }
        return out;
    }

    std::string parse_attr_value() {
        char quote = peek();
        if (quote != '"' && quote != '\'') fail("expected a quoted attribute value");
        get();
        std::string raw;
        while (!eof() && peek() != quote) raw += get();
        if (eof()) fail("unterminated attribute value");
        get();
        return decode_entities(raw);
    }

    XmlNode parse_element() {
        expect('<');
        XmlNode node;
        node.line = line_;
        node.name = parse_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated start tag");
            if (peek() == '/') {
                get();
                expect('>');
                return node;  // self-closing
            }
            if (peek() == '>') {
                get();
                break;
            }
            std::string key = parse_name();
            skip_ws();
            expect('=');
            skip_ws();
            node.attrs.emplace_back(std::move(key), parse_attr_value());
        }

        std::string raw_text;
        for (;;) {
            if (eof()) fail("missing end tag for <" + node.name + ">");
            if (peek() == '<') {
                if (starts_with("</")) {
                    get();
                    get();
                    std::string end_name = parse_name();
                    if (end_name != node.name) {
                        fail("mismatched end tag </" + end_name + "> for <" + node.name + ">");
                    }
                    skip_ws();
                    expect('>');
                    break;
                }
                if (starts_with("<!--")) {
                    skip_until("-->");
                    continue;
                }
                if (starts_with("<?")) {
                    skip_until("?>");
                    continue;
                }
                node.children.push_back(parse_element());
            } else {
                raw_text += get();
            }
        }

        std::string decoded = decode_entities(raw_text);
        std::size_t b = decoded.find_first_not_of(" \t\r\n");
        std::size_t e = decoded.find_last_not_of(" \t\r\n");
        if (b != std::string::npos) node.text = decoded.substr(b, e - b + 1);
        return node;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

XmlNode xml_parse(std::string_view text) { return Parser(text).parse_document(); }

}  // namespace colanet
