#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "capwire/domain.hpp"
#include "capwire/errors.hpp"

namespace capwire::caption {

// Default marker that opens the credits segment. Configurable per deployment.
inline constexpr std::string_view kDefaultCreditPrefix = "Mandatory Credit:";

// An in-body player reference of the form `First Last (N)`.
struct EntityMention {
    std::string player_name;
    int jersey_number = 0;

    bool operator==(const EntityMention&) const = default;
};

// Structured decomposition of the four-segment caption:
//   <date>; <location>; <body> <credit>
// entity_mentions is derived from body; keep them in sync via make_parts().
struct CaptionParts {
    std::string date_text;
    std::string location_text;
    std::string body;
    std::string credit_text;
    std::vector<EntityMention> entity_mentions;

    bool operator==(const CaptionParts&) const = default;
};

enum class ViolationCode {
    BAD_DATE,
    BAD_LOCATION,
    BAD_CREDIT,
    NO_ENTITY,
    UNKNOWN_ENTITY,
    MALFORMED_SEGMENTS,
};

std::string to_string(ViolationCode code);

struct Violation {
    ViolationCode code;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    bool has(ViolationCode code) const;
};

// Thrown by make_parts / compose / parse. The code mirrors the validation
// vocabulary so callers can branch without string matching.
struct CaptionError : Error {
    CaptionError(ViolationCode code_, const std::string& what)
        : Error(what), code(code_) {}

    ViolationCode code;
};

// Scans a body for mentions: a maximal run of two or more capitalized tokens
// followed by a single space and a parenthesized 1-2 digit number.
// "Team A quarterback Pat Doe (1) throws" -> {"Pat Doe", 1}.
std::vector<EntityMention> extract_mentions(std::string_view body);

// Validates the segment invariants (all non-empty, no "; " inside any
// segment, no surrounding whitespace, body ends with a period) and derives
// entity_mentions. Throws CaptionError naming the violated field.
CaptionParts make_parts(std::string date_text, std::string location_text,
                        std::string body, std::string credit_text);

// Emits exactly `<date>; <location>; <body> <credit>`. Re-checks the segment
// invariants; byte-exact for equal inputs.
std::string compose(const CaptionParts& parts);

// Strict parse: splits on the first two "; " separators, then takes the final
// clause starting at credit_prefix as the credits. Date/location segments may
// come back empty; validate() reports on their content. Throws CaptionError
// with MALFORMED_SEGMENTS or BAD_CREDIT.
CaptionParts parse(std::string_view text,
                   std::string_view credit_prefix = kDefaultCreditPrefix);

// Full caption check against the image metadata and the allowed entity list.
// Never throws; every finding becomes a report entry.
ValidationReport validate(std::string_view text, const ImageMetadata& metadata,
                          const std::vector<ResolvedEntity>& allowed_entities,
                          std::string_view credit_prefix = kDefaultCreditPrefix);

}  // namespace capwire::caption
