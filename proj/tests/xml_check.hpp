#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace credi::testing {

struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<XmlElement> children;
    std::string text;
};

/// Small well-formedness checker: balanced tags, quoted attributes, known
/// entities. Enough to validate generated GraphML structure in tests.
class XmlReader {
public:
    explicit XmlReader(const std::string& doc) : s_(doc) {}

    XmlElement parse() {
        skip_prolog();
        XmlElement root = element();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing content");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error("xml: " + what + " at byte " + std::to_string(pos_));
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool starts(const char* p) const { return s_.compare(pos_, std::char_traits<char>::length(p), p) == 0; }
    void skip_prolog() {
        skip_ws();
        if (starts("<?xml")) {
            const auto end = s_.find("?>", pos_);
            if (end == std::string::npos) fail("unterminated declaration");
            pos_ = end + 2;
        }
        skip_ws();
    }
    std::string name() {
        const auto begin = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == ':' ||
                                    s_[pos_] == '_' || s_[pos_] == '-' || s_[pos_] == '.'))
            ++pos_;
        if (pos_ == begin) fail("expected a name");
        return s_.substr(begin, pos_ - begin);
    }
    std::string decode(const std::string& raw) const {
        static const std::map<std::string, std::string> entities{
            {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}};
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '<') throw std::runtime_error("xml: raw '<' in text");
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            const auto semi = raw.find(';', i);
            if (semi == std::string::npos) throw std::runtime_error("xml: unterminated entity");
            const auto it = entities.find(raw.substr(i + 1, semi - i - 1));
            if (it == entities.end()) throw std::runtime_error("xml: unknown entity");
            out += it->second;
            i = semi;
        }
        return out;
    }
    XmlElement element() {
        if (!starts("<")) fail("expected '<'");
        ++pos_;
        XmlElement el;
        el.name = name();
        for (;;) {
            skip_ws();
            if (starts("/>")) {
                pos_ += 2;
                return el;
            }
            if (starts(">")) {
                ++pos_;
                break;
            }
            const std::string attr = name();
            skip_ws();
            if (!starts("=")) fail("expected '='");
            ++pos_;
            skip_ws();
            if (!starts("\"")) fail("expected quoted attribute");
            const auto end = s_.find('"', pos_ + 1);
            if (end == std::string::npos) fail("unterminated attribute");
            if (!el.attributes.emplace(attr, decode(s_.substr(pos_ + 1, end - pos_ - 1))).second) fail("duplicate attribute");
            pos_ = end + 1;
        }
        for (;;) {
            const auto lt = s_.find('<', pos_);
            if (lt == std::string::npos) fail("unterminated element " + el.name);
            el.text += decode(s_.substr(pos_, lt - pos_));
            pos_ = lt;
            if (starts("</")) {
                pos_ += 2;
                if (name() != el.name) fail("mismatched closing tag for " + el.name);
                skip_ws();
                if (!starts(">")) fail("expected '>'");
                ++pos_;
                return el;
            }
            el.children.push_back(element());
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace credi::testing
