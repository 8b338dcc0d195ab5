#include "webscraper/browser.hpp"

#include <atomic>

#include "httplib.h"
#include "json.hpp"

#include "webscraper/errors.hpp"
#include "webscraper/png.hpp"
#include "webscraper/provider.hpp"
#include "webscraper/selector.hpp"
#include "webscraper/url.hpp"

namespace webscraper::browser {

using nlohmann::json;

void PolitenessGate::before_request(const std::string& host) {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = last_ms_.find(host);
  if (it != last_ms_.end()) {
    std::int64_t elapsed = clock_.now_ms() - it->second;
    if (elapsed < delay_ms_) {
      std::int64_t wait = delay_ms_ - elapsed;
      lock.unlock();
      clock_.sleep_ms(wait);
      lock.lock();
    }
  }
  last_ms_[host] = clock_.now_ms();
}

namespace {

std::atomic<int> g_session_counter{0};

std::string resolve_or_throw(const std::string& base,
                             const std::string& reference) {
  auto resolved = url::resolve(base, reference);
  if (!resolved)
    throw webscraper::ValidationError("cannot resolve link '" + reference +
                                      "' against " + base);
  return *resolved;
}

struct HostPort {
  std::string base;   // scheme://host[:port]
  std::string path;   // path with query
  std::string host;
};

HostPort split_url(const std::string& absolute_url) {
  auto parsed = url::parse(absolute_url);
  if (!parsed)
    throw ValidationError("invalid URL: " + absolute_url);
  HostPort hp;
  hp.base = parsed->scheme + "://" + parsed->host;
  if (parsed->port >= 0) hp.base += ":" + std::to_string(parsed->port);
  hp.path = parsed->path.empty() ? "/" : parsed->path;
  if (parsed->query) hp.path += "?" + *parsed->query;
  hp.host = url::host_of(absolute_url);
  return hp;
}

}  // namespace

FetchBrowser::FetchBrowser(Clock& clock, int politeness_delay_ms)
    : clock_(clock),
      gate_(clock, politeness_delay_ms),
      id_("fetch-" + std::to_string(++g_session_counter)) {}

void FetchBrowser::ensure_alive() const {
  if (!alive_) throw ToolFatalError("browser session " + id_ + " is closed");
}

std::string FetchBrowser::fetch(const std::string& absolute_url) {
  ensure_alive();
  HostPort hp = split_url(absolute_url);
  gate_.before_request(hp.host);

  httplib::Client client(hp.base);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(10, 0);

  httplib::Headers headers;
  auto jar = cookies_.find(hp.host);
  if (jar != cookies_.end() && !jar->second.empty()) {
    std::string cookie;
    for (const auto& [name, value] : jar->second) {
      if (!cookie.empty()) cookie += "; ";
      cookie += name + "=" + value;
    }
    headers.emplace("Cookie", cookie);
  }

  auto res = client.Get(hp.path, headers);
  if (!res)
    throw ValidationError("fetch of " + absolute_url +
                          " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ValidationError("fetch of " + absolute_url + " returned status " +
                          std::to_string(res->status));

  auto range = res->headers.equal_range("Set-Cookie");
  for (auto it = range.first; it != range.second; ++it) {
    const std::string& raw = it->second;
    size_t semi = raw.find(';');
    std::string pair = raw.substr(0, semi);
    size_t eq = pair.find('=');
    if (eq != std::string::npos)
      cookies_[hp.host][pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return res->body;
}

void FetchBrowser::load_into_dom(const std::string& absolute_url) {
  std::string body = fetch(absolute_url);
  dom_ = html::Document::parse(body);
  url_ = absolute_url;
  scroll_y_ = 0;
}

void FetchBrowser::navigate(const std::string& absolute_url) {
  ensure_alive();
  if (!url::is_absolute_http(absolute_url))
    throw ValidationError("invalid URL: " + absolute_url);
  load_into_dom(absolute_url);
}

void FetchBrowser::click(const std::string& selector) {
  ensure_alive();
  if (url_.empty()) throw ValidationError("no page loaded yet");

  int target = css::query_first(dom_, selector);
  if (target < 0)
    throw ValidationError("element not found: " + selector);
  const html::Node& node = dom_.node(target);

  if (node.tag == "a") {
    const std::string* href = node.attr("href");
    if (!href) throw ValidationError("anchor has no href: " + selector);
    load_into_dom(resolve_or_throw(url_, *href));
    return;
  }

  if (const std::string* dest = node.attr("data-href")) {
    load_into_dom(resolve_or_throw(url_, *dest));
    return;
  }

  if (const std::string* frag_url = node.attr("data-load-more")) {
    const std::string* target_id = node.attr("data-target");
    if (!target_id)
      throw ValidationError("load-more element lacks data-target");
    int list = css::query_first(dom_, "#" + *target_id);
    if (list < 0)
      throw ValidationError("load-more target #" + *target_id + " not found");

    std::string fragment_html = fetch(resolve_or_throw(url_, *frag_url));
    html::Document fragment = html::Document::parse(fragment_html);

    // The fragment's single top element wraps the new items and may name
    // the next fragment in data-next.
    int wrapper = -1;
    for (int child : fragment.node(fragment.root()).children)
      if (fragment.node(child).type == html::NodeType::kElement) {
        wrapper = child;
        break;
      }
    if (wrapper < 0) throw ValidationError("load-more fragment is empty");

    for (int child : fragment.node(wrapper).children)
      dom_.graft(list, fragment, child);

    const std::string* next = fragment.node(wrapper).attr("data-next");
    html::Node& button = dom_.node(target);
    for (auto& [name, value] : button.attrs)
      if (name == "data-load-more") {
        if (next) {
          value = *next;
        } else {
          // exhausted: disable the control
          name = "data-load-more-done";
        }
        break;
      }
    return;
  }

  throw ValidationError("element is not clickable: " + selector);
}

void FetchBrowser::scroll(int amount) {
  ensure_alive();
  scroll_y_ = std::max(0, scroll_y_ + amount);
}

std::string FetchBrowser::screenshot() {
  ensure_alive();
  std::string seed = url_ + "#y=" + std::to_string(scroll_y_) + "#n=" +
                     std::to_string(dom_.size());
  return png::placeholder_screenshot(seed);
}

std::string FetchBrowser::get_html() {
  ensure_alive();
  if (url_.empty()) throw ValidationError("no page loaded yet");
  return dom_.serialize();
}

std::string FetchBrowser::current_url() {
  ensure_alive();
  return url_;
}

const std::string& FetchBrowser::session_id() const { return id_; }

void FetchBrowser::close() { alive_ = false; }

// --- WebDriver ---

WebDriverBrowser::WebDriverBrowser(const std::string& driver_endpoint,
                                   Clock& clock, int politeness_delay_ms)
    : endpoint_(driver_endpoint),
      clock_(clock),
      gate_(clock, politeness_delay_ms) {
  json caps = {{"capabilities", json::object()}};
  std::string body = command("POST", "/session", caps.dump());
  try {
    json value = json::parse(body).at("value");
    id_ = value.at("sessionId").get<std::string>();
  } catch (const json::exception& e) {
    throw ToolFatalError("webdriver session creation failed: " + body);
  }
}

WebDriverBrowser::~WebDriverBrowser() {
  if (id_.empty()) return;
  try {
    command("DELETE", "/session/" + id_, "");
  } catch (...) {
    // session teardown is best effort
  }
}

std::string WebDriverBrowser::command(const std::string& method,
                                      const std::string& path,
                                      const std::string& body) {
  httplib::Client client(endpoint_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(30, 0);

  httplib::Result res;
  if (method == "POST")
    res = client.Post(path, body, "application/json");
  else if (method == "GET")
    res = client.Get(path);
  else
    res = client.Delete(path);

  if (!res)
    throw ToolFatalError("webdriver unreachable at " + endpoint_ + ": " +
                         httplib::to_string(res.error()));
  if (res->status == 200) return res->body;

  // W3C error document: {"value": {"error": "...", "message": "..."}}
  std::string error_code, message = res->body;
  try {
    json value = json::parse(res->body).at("value");
    error_code = value.value("error", "");
    message = value.value("message", message);
  } catch (const json::exception&) {
  }
  if (error_code == "no such element" || error_code == "invalid argument" ||
      error_code == "no such window" || error_code == "element not interactable")
    throw ValidationError("webdriver: " + error_code + ": " + message);
  throw ToolFatalError("webdriver command " + path + " failed: " + message);
}

void WebDriverBrowser::navigate(const std::string& absolute_url) {
  if (!url::is_absolute_http(absolute_url))
    throw ValidationError("invalid URL: " + absolute_url);
  gate_.before_request(url::host_of(absolute_url));
  command("POST", "/session/" + id_ + "/url",
          json{{"url", absolute_url}}.dump());
}

void WebDriverBrowser::click(const std::string& selector) {
  std::string body =
      command("POST", "/session/" + id_ + "/element",
              json{{"using", "css selector"}, {"value", selector}}.dump());
  std::string element_id;
  try {
    json value = json::parse(body).at("value");
    element_id = value.begin().value().get<std::string>();
  } catch (const json::exception&) {
    throw ValidationError("element not found: " + selector);
  }
  // A click may trigger a same-host fetch; honor the politeness gap.
  gate_.before_request(url::host_of(current_url()));
  command("POST", "/session/" + id_ + "/element/" + element_id + "/click",
          "{}");
}

void WebDriverBrowser::scroll(int amount) {
  json script = {{"script", "window.scrollBy(0, arguments[0]);"},
                 {"args", json::array({amount})}};
  command("POST", "/session/" + id_ + "/execute/sync", script.dump());
}

std::string WebDriverBrowser::screenshot() {
  std::string body = command("GET", "/session/" + id_ + "/screenshot", "");
  try {
    return provider::base64_decode(
        json::parse(body).at("value").get<std::string>());
  } catch (const json::exception&) {
    throw ValidationError("webdriver returned an unreadable screenshot");
  }
}

std::string WebDriverBrowser::get_html() {
  std::string body = command("GET", "/session/" + id_ + "/source", "");
  try {
    return json::parse(body).at("value").get<std::string>();
  } catch (const json::exception&) {
    throw ValidationError("webdriver returned an unreadable page source");
  }
}

std::string WebDriverBrowser::current_url() {
  std::string body = command("GET", "/session/" + id_ + "/url", "");
  try {
    return json::parse(body).at("value").get<std::string>();
  } catch (const json::exception&) {
    throw ValidationError("webdriver returned an unreadable url");
  }
}

const std::string& WebDriverBrowser::session_id() const { return id_; }

}  // namespace webscraper::browser
