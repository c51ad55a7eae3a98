#pragma once

#include <string>
#include <vector>

namespace obskit::testing {

/// Minimal well-formedness check for generated SVG: balanced and properly
/// nested elements, quoted attributes, a single root and no stray '<' in
/// text. Returns an empty string on success, else a description.
inline std::string xml_problem(const std::string& doc) {
    std::vector<std::string> stack;
    int roots = 0;
    std::size_t i = 0;
    while (i < doc.size()) {
        if (doc[i] != '<') {
            if (doc[i] == '&') {
                const auto semi = doc.find(';', i);
                if (semi == std::string::npos || semi - i > 6) return "bare ampersand";
            }
            ++i;
            continue;
        }
        const auto close = doc.find('>', i);
        if (close == std::string::npos) return "unterminated tag";
        std::string tag = doc.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return "empty tag";
        if (tag[0] == '?' || tag[0] == '!') continue;
        // Attribute quotes must balance.
        std::size_t quotes = 0;
        for (char c : tag) quotes += c == '"';
        if (quotes % 2) return "unbalanced quotes in <" + tag + ">";
        if (tag[0] == '/') {
            const std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return "mismatched </" + name + ">";
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
        if (stack.empty()) ++roots;
        if (!self_closing) stack.push_back(name);
    }
    if (!stack.empty()) return "unclosed <" + stack.back() + ">";
    if (roots != 1) return "expected exactly one root element";
    return {};
}

/// Self-contained: no external references beyond the SVG namespace URI.
inline bool svg_self_contained(const std::string& doc) {
    if (doc.find("href") != std::string::npos) return false;
    if (doc.find("url(") != std::string::npos) return false;
    std::size_t pos = 0, http = 0;
    while ((pos = doc.find("http", pos)) != std::string::npos) {
        ++http;
        ++pos;
    }
    return http <= 1;
}

}  // namespace obskit::testing
