#pragma once

// Artifact formatting shared by every exporter: fixed float formatting,
// deterministic JSON emission and LiftedState (de)serialization.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"

#include "delayadm/delay_state.hpp"

namespace delayadm {

using Json = nlohmann::ordered_json;

/// 17 significant digits, lowercase e-notation ("%.16e").
std::string format_double(double v);

/// JSON text with object keys in insertion order and every floating-point
/// value rendered through format_double. Non-finite numbers become null.
std::string dump_json(const Json& j, int indent = 2);

/// Writes dump_json(j) plus a trailing newline; throws ConfigError when the
/// file cannot be opened.
void write_json_file(const std::string& path, const Json& j);
void write_text_file(const std::string& path, const std::string& text);

/// Complex number as [re, im].
Json complex_to_json(cplx z);
cplx complex_from_json(const Json& j);

/// Rows of [re, im] pairs. A plain real number is accepted for each entry
/// when reading.
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const char* what);

/// {"head": [[re, im], ...], "tail": {"m": m, "values": [[[re, im], ...], ...]}}.
Json state_to_json(const LiftedState& v);
LiftedState state_from_json(const Json& j);

/// Dense CSV dump of re/im parts in row-major order: one line per row,
/// columns re(c0),im(c0),re(c1),...
void write_matrix_csv(std::ostream& os, const CMatrix& m);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace delayadm
