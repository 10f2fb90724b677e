#include "delaycode/text.hpp"

#include <algorithm>

namespace delaycode {

namespace utf8 {

std::vector<char32_t> decode(std::string_view bytes) {
    std::vector<char32_t> out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        const auto lead = static_cast<unsigned char>(bytes[i]);
        std::size_t extra = 0;
        char32_t cp = 0;
        if (lead < 0x80) {
            cp = lead;
        } else if ((lead & 0xE0) == 0xC0) {
            extra = 1;
            cp = lead & 0x1F;
        } else if ((lead & 0xF0) == 0xE0) {
            extra = 2;
            cp = lead & 0x0F;
        } else if ((lead & 0xF8) == 0xF0) {
            extra = 3;
            cp = lead & 0x07;
        } else {
            // stray continuation byte or invalid lead; map to a separator
            out.push_back(U' ');
            ++i;
            continue;
        }
        bool valid = true;
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= bytes.size()) {
                valid = false;
                break;
            }
            const auto cont = static_cast<unsigned char>(bytes[i + k]);
            if ((cont & 0xC0) != 0x80) {
                valid = false;
                break;
            }
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (!valid) {
            out.push_back(U' ');
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append(out, cp);
    return out;
}

std::size_t length(std::string_view bytes) {
    return static_cast<std::size_t>(std::count_if(bytes.begin(), bytes.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

}  // namespace utf8

namespace {

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_letter(char32_t cp) {
    if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
    if (cp >= 0xC0 && cp <= 0xFF) return cp != 0xD7 && cp != 0xF7;
    if (cp >= 0x100) {
        // general punctuation, symbols, arrows, box drawing, CJK punctuation
        if (cp >= 0x2000 && cp <= 0x2BFF) return false;
        if (cp >= 0x3000 && cp <= 0x303F) return false;
        if (cp == 0xFEFF) return false;
        return true;
    }
    return false;
}

char32_t to_lower(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    return cp;
}

bool all_digits(std::string_view token) {
    return !token.empty() &&
           std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// "sth<digits>" with optional trailing "km"; returns the canonical form or empty.
std::string attached_sth(std::string_view token) {
    if (token.size() <= 3 || token.substr(0, 3) != "sth") return {};
    std::string_view rest = token.substr(3);
    if (rest.size() > 2 && rest.substr(rest.size() - 2) == "km") rest.remove_suffix(2);
    if (!all_digits(rest)) return {};
    return "sth" + std::string(rest);
}

// "<digits>" or "<digits>km"; returns digits or empty.
std::string speed_value(std::string_view token) {
    if (token.size() > 2 && token.substr(token.size() - 2) == "km") token.remove_suffix(2);
    if (!all_digits(token)) return {};
    return std::string(token);
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < text.size() && !(text[j] == ' ' || text[j] == '\t' || text[j] == '\n' || text[j] == '\r'))
            ++j;
        if (j > i) tokens.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return tokens;
}

std::string normalize_text(std::string_view raw, const NormalizeOptions& options) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char32_t cp : utf8::decode(raw)) {
        if (is_letter(cp)) {
            utf8::append(cleaned, to_lower(cp));
        } else if (is_digit(cp)) {
            cleaned.push_back(static_cast<char>(cp));
        } else {
            cleaned.push_back(' ');
        }
    }

    const std::vector<std::string> tokens = split_whitespace(cleaned);
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        std::string sth;
        if (tok == "sth" && i + 1 < tokens.size()) {
            const std::string speed = speed_value(tokens[i + 1]);
            if (!speed.empty()) {
                sth = "sth" + speed;
                ++i;
            }
        } else {
            sth = attached_sth(tok);
        }
        if (!sth.empty()) {
            while (i + 1 < tokens.size() && tokens[i + 1] == "km") ++i;
            out.push_back(std::move(sth));
            continue;
        }
        if (tok == "trainnr" || (all_digits(tok) && tok.size() >= options.min_train_digits)) {
            out.emplace_back(kTrainPlaceholder);
            continue;
        }
        out.push_back(tok);
    }

    std::string joined;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i) joined.push_back(' ');
        joined += out[i];
    }
    return joined;
}

bool is_numeric_only(std::string_view normalized) {
    const auto tokens = split_whitespace(normalized);
    if (tokens.empty()) return false;
    return std::all_of(tokens.begin(), tokens.end(),
                       [](const std::string& t) { return t == kTrainPlaceholder || all_digits(t); });
}

}  // namespace delaycode
