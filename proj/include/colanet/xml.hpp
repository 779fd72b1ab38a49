#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace colanet {

struct XmlError : std::runtime_error {
    XmlError(const std::string& msg, int line)
        : std::runtime_error("xml parse error at line " + std::to_string(line) + ": " + msg),
          line(line) {}
    int line;
};

/// DOM node of the small XML subset used by network description files:
/// elements, attributes, character data, comments and an optional
/// declaration. No namespaces, CDATA or DTDs.
struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<XmlNode> children;
    std::string text;  // concatenated character data, trimmed
    int line = 0;

    const XmlNode* child(std::string_view child_name) const;
    std::vector<const XmlNode*> children_named(std::string_view child_name) const;
    const std::string* attr(std::string_view attr_name) const;
};

/// Parses a document and returns its root element. Throws XmlError with a
/// line number on malformed input.
XmlNode xml_parse(std::string_view text);

}  // namespace colanet
