#include "webscraper/url.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace webscraper::url {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

int default_port(const std::string& scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return -1;
}

// RFC 3986 5.2.4 remove_dot_segments.
std::string remove_dot_segments(const std::string& path) {
  std::string input = path;
  std::string output;
  while (!input.empty()) {
    if (input.rfind("../", 0) == 0) {
      input.erase(0, 3);
    } else if (input.rfind("./", 0) == 0) {
      input.erase(0, 2);
    } else if (input.rfind("/./", 0) == 0) {
      input.erase(0, 2);
    } else if (input == "/.") {
      input = "/";
    } else if (input.rfind("/../", 0) == 0) {
      input.erase(0, 3);
      auto pos = output.find_last_of('/');
      output.erase(pos == std::string::npos ? 0 : pos);
    } else if (input == "/..") {
      input = "/";
      auto pos = output.find_last_of('/');
      output.erase(pos == std::string::npos ? 0 : pos);
    } else if (input == "." || input == "..") {
      input.clear();
    } else {
      size_t start = input[0] == '/' ? 1 : 0;
      auto pos = input.find('/', start);
      output += input.substr(0, pos == std::string::npos ? input.size() : pos);
      input.erase(0, pos == std::string::npos ? input.size() : pos);
    }
  }
  return output;
}

// Splits "host:port" (no userinfo support; IPv6 literals not handled).
bool parse_authority(const std::string& authority, Url* out) {
  auto colon = authority.find(':');
  if (colon == std::string::npos) {
    out->host = authority;
    out->port = -1;
  } else {
    out->host = authority.substr(0, colon);
    std::string port_str = authority.substr(colon + 1);
    if (port_str.empty()) {
      out->port = -1;
    } else {
      for (char c : port_str)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
      try {
        out->port = std::stoi(port_str);
      } catch (...) {
        return false;
      }
      if (out->port < 0 || out->port > 65535) return false;
    }
  }
  return !out->host.empty();
}

// Splits path[?query][#fragment].
void parse_path_query_fragment(const std::string& rest, Url* out) {
  std::string work = rest;
  auto hash = work.find('#');
  if (hash != std::string::npos) {
    out->fragment = work.substr(hash + 1);
    work.erase(hash);
  }
  auto q = work.find('?');
  if (q != std::string::npos) {
    out->query = work.substr(q + 1);
    work.erase(q);
  }
  out->path = work;
}

}  // namespace

std::string Url::to_string() const {
  std::string s = scheme + "://" + host;
  if (port >= 0) s += ":" + std::to_string(port);
  s += path;
  if (query) s += "?" + *query;
  if (fragment) s += "#" + *fragment;
  return s;
}

std::optional<Url> parse(const std::string& input) {
  auto pos = input.find("://");
  if (pos == std::string::npos || pos == 0) return std::nullopt;
  Url u;
  u.scheme = lower(input.substr(0, pos));
  if (u.scheme != "http" && u.scheme != "https") return std::nullopt;
  std::string rest = input.substr(pos + 3);
  auto end_auth = rest.find_first_of("/?#");
  std::string authority =
      rest.substr(0, end_auth == std::string::npos ? rest.size() : end_auth);
  if (!parse_authority(authority, &u)) return std::nullopt;
  if (end_auth == std::string::npos) {
    u.path = "";
  } else {
    parse_path_query_fragment(rest.substr(end_auth), &u);
  }
  return u;
}

bool is_absolute_http(const std::string& input) {
  return parse(input).has_value();
}

std::optional<Url> resolve(const Url& base, const std::string& reference) {
  if (reference.empty()) {
    Url u = base;
    u.fragment.reset();
    return u;
  }
  // Absolute reference wins outright.
  if (auto abs = parse(reference)) {
    abs->path = remove_dot_segments(abs->path);
    return abs;
  }
  Url u;
  u.scheme = base.scheme;
  if (reference.rfind("//", 0) == 0) {
    // Scheme-relative: new authority.
    std::string rest = reference.substr(2);
    auto end_auth = rest.find_first_of("/?#");
    std::string authority =
        rest.substr(0, end_auth == std::string::npos ? rest.size() : end_auth);
    if (!parse_authority(authority, &u)) return std::nullopt;
    if (end_auth != std::string::npos)
      parse_path_query_fragment(rest.substr(end_auth), &u);
    u.path = remove_dot_segments(u.path);
    return u;
  }
  u.host = base.host;
  u.port = base.port;
  if (reference[0] == '#') {
    u.path = base.path;
    u.query = base.query;
    u.fragment = reference.substr(1);
    return u;
  }
  if (reference[0] == '?') {
    parse_path_query_fragment(reference, &u);
    u.path = base.path;
    return u;
  }
  parse_path_query_fragment(reference, &u);
  if (!u.path.empty() && u.path[0] == '/') {
    u.path = remove_dot_segments(u.path);
    return u;
  }
  // Relative path: merge with the base path (5.2.3).
  std::string merged;
  if (base.path.empty()) {
    merged = "/" + u.path;
  } else {
    auto slash = base.path.find_last_of('/');
    merged = (slash == std::string::npos ? std::string()
                                         : base.path.substr(0, slash + 1)) +
             u.path;
  }
  u.path = remove_dot_segments(merged);
  return u;
}

std::string normalize(const Url& u) {
  Url n = u;
  n.scheme = lower(n.scheme);
  n.host = lower(n.host);
  if (n.port == default_port(n.scheme)) n.port = -1;
  if (n.path.empty()) n.path = "/";
  n.fragment.reset();
  return n.to_string();
}

std::string normalize(const std::string& input) {
  auto u = parse(input);
  if (!u) return input;
  return normalize(*u);
}

std::optional<std::string> resolve(const std::string& base,
                                   const std::string& reference) {
  auto base_url = parse(base);
  if (!base_url) return std::nullopt;
  auto resolved = resolve(*base_url, reference);
  if (!resolved) return std::nullopt;
  return resolved->to_string();
}

std::string host_of(const std::string& absolute_url) {
  auto u = parse(absolute_url);
  return u ? lower(u->host) : std::string();
}

}  // namespace webscraper::url
