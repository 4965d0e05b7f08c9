#pragma once

#include <string>
#include <string_view>

#include "testgen/model/json_text.hpp"
#include "testgen/model/value.hpp"

namespace testgen {

/// Canonical single-line document for `v`. Object fields are emitted in
/// lexicographic order regardless of insertion order, so equal values always
/// encode to identical bytes.
std::string encode_value(const ObservedValue& v);

/// Inverse of encode_value. Accepts any whitespace layout. Throws
/// DocumentError with code MalformedDocument or UnknownKind.
ObservedValue decode_value(std::string_view doc);

json::Node value_to_node(const ObservedValue& v);
ObservedValue value_from_node(const json::Node& n);

json::Node method_to_node(const MethodId& m);
MethodId method_from_node(const json::Node& n);

/// One store line (no trailing newline).
std::string encode_record(const ObservationRecord& r);
ObservationRecord decode_record(std::string_view line);

/// Text of a primitive as shown to people: strings quoted, others verbatim.
std::string display_lexeme(const ObservedValue& v);

}  // namespace testgen
