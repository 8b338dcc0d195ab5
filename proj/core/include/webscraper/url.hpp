#pragma once

#include <optional>
#include <string>

namespace webscraper::url {

// Parsed http(s) URL. Only the components the scraper needs.
struct Url {
  std::string scheme;
  std::string host;
  int port = -1;  // -1 when absent
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;

  std::string to_string() const;
};

// Parses an absolute http(s) URL. Returns nullopt for anything else
// (relative references, unsupported schemes, empty host).
std::optional<Url> parse(const std::string& input);

bool is_absolute_http(const std::string& input);

// RFC 3986 section 5 reference resolution against an absolute base.
// Handles fragment-only, query-only, scheme-relative, absolute-path and
// relative-path references, with dot-segment removal.
std::optional<Url> resolve(const Url& base, const std::string& reference);

// String-level resolution; nullopt when the base does not parse.
std::optional<std::string> resolve(const std::string& base,
                                   const std::string& reference);

// Canonical form used for deduplication and URL exact-match comparison:
// lowercase scheme and host, default port dropped, fragment stripped,
// empty path rendered as "/", query preserved. Idempotent.
std::string normalize(const Url& u);

// Convenience: parse + normalize. Inputs that fail to parse are returned
// unchanged so comparisons degrade to raw string equality.
std::string normalize(const std::string& input);

std::string host_of(const std::string& absolute_url);

}  // namespace webscraper::url
