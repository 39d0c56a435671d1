#include "capwire/caption.hpp"

#include <algorithm>
#include <cctype>

namespace capwire::caption {

namespace {

constexpr std::string_view kSeparator = "; ";

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_name_char(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '\'' || c == '.' || c == '-';
}

bool has_surrounding_space(std::string_view s) {
    if (s.empty()) return false;
    return std::isspace(static_cast<unsigned char>(s.front())) ||
           std::isspace(static_cast<unsigned char>(s.back()));
}

void check_segment(std::string_view value, const char* field, ViolationCode code) {
    if (value.empty()) {
        throw CaptionError(code, std::string(field) + " segment is empty");
    }
    if (value.find(kSeparator) != std::string_view::npos) {
        throw CaptionError(code, std::string(field) + " segment contains the '; ' separator");
    }
    if (has_surrounding_space(value)) {
        throw CaptionError(code, std::string(field) + " segment has surrounding whitespace");
    }
}

}  // namespace

std::string to_string(ViolationCode code) {
    switch (code) {
        case ViolationCode::BAD_DATE: return "BAD_DATE";
        case ViolationCode::BAD_LOCATION: return "BAD_LOCATION";
        case ViolationCode::BAD_CREDIT: return "BAD_CREDIT";
        case ViolationCode::NO_ENTITY: return "NO_ENTITY";
        case ViolationCode::UNKNOWN_ENTITY: return "UNKNOWN_ENTITY";
        case ViolationCode::MALFORMED_SEGMENTS: return "MALFORMED_SEGMENTS";
    }
    return "MALFORMED_SEGMENTS";
}

bool ValidationReport::has(ViolationCode code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [code](const Violation& v) { return v.code == code; });
}

std::vector<EntityMention> extract_mentions(std::string_view body) {
    std::vector<EntityMention> mentions;

    for (std::size_t open = 0; open < body.size(); ++open) {
        if (body[open] != '(') continue;

        // 1-2 digit jersey, then ')'.
        std::size_t pos = open + 1;
        int jersey = 0;
        std::size_t digits = 0;
        while (pos < body.size() && digits < 3 &&
               std::isdigit(static_cast<unsigned char>(body[pos]))) {
            jersey = jersey * 10 + (body[pos] - '0');
            ++pos;
            ++digits;
        }
        if (digits == 0 || digits > 2 || pos >= body.size() || body[pos] != ')') continue;

        // Exactly one space between the name run and '('.
        if (open == 0 || body[open - 1] != ' ') continue;

        // Walk capitalized tokens leftwards from the space.
        std::size_t end = open - 1;  // one past the run
        std::vector<std::string_view> tokens;
        std::size_t cursor = end;
        while (cursor > 0) {
            std::size_t start = cursor;
            while (start > 0 && is_name_char(body[start - 1])) --start;
            if (start == cursor) break;  // empty token (double space or punctuation)
            const std::string_view token = body.substr(start, cursor - start);
            if (!is_upper(token.front())) break;
            tokens.push_back(token);
            if (start == 0) break;
            if (body[start - 1] != ' ') break;        // token glued to something else
            if (start >= 2 && body[start - 2] == ' ') { cursor = 0; break; }  // double space ends run
            cursor = start - 1;
        }
        if (tokens.size() < 2) continue;

        std::string name;
        for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
            if (!name.empty()) name += ' ';
            name.append(it->data(), it->size());
        }
        mentions.push_back(EntityMention{std::move(name), jersey});
    }
    return mentions;
}

CaptionParts make_parts(std::string date_text, std::string location_text,
                        std::string body, std::string credit_text) {
    check_segment(date_text, "date", ViolationCode::BAD_DATE);
    check_segment(location_text, "location", ViolationCode::BAD_LOCATION);
    check_segment(body, "body", ViolationCode::MALFORMED_SEGMENTS);
    check_segment(credit_text, "credit", ViolationCode::BAD_CREDIT);
    if (body.back() != '.') {
        throw CaptionError(ViolationCode::MALFORMED_SEGMENTS,
                           "body segment must end with a period");
    }

    CaptionParts parts;
    parts.date_text = std::move(date_text);
    parts.location_text = std::move(location_text);
    parts.body = std::move(body);
    parts.credit_text = std::move(credit_text);
    parts.entity_mentions = extract_mentions(parts.body);
    return parts;
}

std::string compose(const CaptionParts& parts) {
    // Re-validate so a hand-built CaptionParts cannot leak a malformed caption.
    CaptionParts checked = make_parts(parts.date_text, parts.location_text,
                                      parts.body, parts.credit_text);
    std::string out = checked.date_text;
    out += kSeparator;
    out += checked.location_text;
    out += kSeparator;
    out += checked.body;
    out += ' ';
    out += checked.credit_text;
    return out;
}

CaptionParts parse(std::string_view text, std::string_view credit_prefix) {
    const auto first = text.find(kSeparator);
    if (first == std::string_view::npos) {
        throw CaptionError(ViolationCode::MALFORMED_SEGMENTS,
                           "fewer than two '; ' separators");
    }
    const auto second = text.find(kSeparator, first + kSeparator.size());
    if (second == std::string_view::npos) {
        throw CaptionError(ViolationCode::MALFORMED_SEGMENTS,
                           "fewer than two '; ' separators");
    }

    CaptionParts parts;
    parts.date_text = std::string(text.substr(0, first));
    parts.location_text =
        std::string(text.substr(first + kSeparator.size(), second - first - kSeparator.size()));

    const std::string_view remainder = text.substr(second + kSeparator.size());
    const auto credit_at = remainder.rfind(credit_prefix);
    if (credit_at == std::string_view::npos) {
        throw CaptionError(ViolationCode::BAD_CREDIT,
                           "credit prefix '" + std::string(credit_prefix) + "' not found");
    }
    parts.credit_text = std::string(remainder.substr(credit_at));

    std::string_view body = remainder.substr(0, credit_at);
    while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
    if (body.empty()) {
        throw CaptionError(ViolationCode::MALFORMED_SEGMENTS, "empty body");
    }
    if (body.back() != '.') {
        throw CaptionError(ViolationCode::MALFORMED_SEGMENTS,
                           "body does not end with a period");
    }
    parts.body = std::string(body);
    parts.entity_mentions = extract_mentions(parts.body);
    return parts;
}

ValidationReport validate(std::string_view text, const ImageMetadata& metadata,
                          const std::vector<ResolvedEntity>& allowed_entities,
                          std::string_view credit_prefix) {
    ValidationReport report;
    auto add = [&report](ViolationCode code, std::string detail) {
        report.violations.push_back(Violation{code, std::move(detail)});
    };

    CaptionParts parts;
    try {
        parts = parse(text, credit_prefix);
    } catch (const CaptionError& e) {
        add(e.code, e.what());
        report.ok = false;
        return report;
    }

    const std::string want_date = format_date(metadata.event_date);
    if (parts.date_text != want_date) {
        add(ViolationCode::BAD_DATE,
            "date segment '" + parts.date_text + "' does not match '" + want_date + "'");
    }
    if (parts.location_text.empty()) {
        add(ViolationCode::BAD_LOCATION, "location segment is empty");
    }
    if (parts.credit_text != metadata.credit) {
        add(ViolationCode::BAD_CREDIT,
            "credit segment '" + parts.credit_text + "' does not match metadata credit");
    }

    for (const EntityMention& mention : parts.entity_mentions) {
        const bool allowed = std::any_of(
            allowed_entities.begin(), allowed_entities.end(), [&](const ResolvedEntity& e) {
                return e.status == ResolveStatus::RESOLVED &&
                       e.player_name == mention.player_name &&
                       e.detection.jersey_number == mention.jersey_number;
            });
        if (!allowed) {
            add(ViolationCode::UNKNOWN_ENTITY,
                mention.player_name + " (" + std::to_string(mention.jersey_number) +
                    ") is not an allowed entity");
        }
    }

    if (!allowed_entities.empty() && parts.entity_mentions.empty()) {
        add(ViolationCode::NO_ENTITY, "caption mentions none of the identified players");
    }

    report.ok = report.violations.empty();
    return report;
}

}  // namespace capwire::caption
