#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "webscraper/clock.hpp"
#include "webscraper/html.hpp"

namespace webscraper::browser {

// Enforces the per-host politeness delay: callers announce each request
// and the gate sleeps until the configured gap has passed.
class PolitenessGate {
 public:
  PolitenessGate(Clock& clock, int delay_ms)
      : clock_(clock), delay_ms_(delay_ms) {}

  void before_request(const std::string& host);

 private:
  Clock& clock_;
  int delay_ms_;
  std::mutex mu_;
  std::map<std::string, std::int64_t> last_ms_;
};

// Recoverable browser problems (bad URL, missing element, HTTP failure)
// surface as ValidationError; a dead session raises ToolFatalError.
class Browser {
 public:
  virtual ~Browser() = default;

  virtual void navigate(const std::string& absolute_url) = 0;
  // selector is a CSS selector; acts on the first match. Anchors follow
  // href, elements with data-href navigate there, and data-load-more
  // fetches a fragment and grafts it into the data-target list.
  virtual void click(const std::string& selector) = 0;
  virtual void scroll(int amount) = 0;
  virtual std::string screenshot() = 0;  // PNG bytes
  virtual std::string get_html() = 0;    // serialized current DOM
  virtual std::string current_url() = 0;
  virtual const std::string& session_id() const = 0;
};

// HTTP-fetching browser with an in-memory DOM: enough JavaScript-free
// behavior (pagination links, data-href buttons, load-more grafting,
// cookies) to drive the fixture sites deterministically.
class FetchBrowser : public Browser {
 public:
  FetchBrowser(Clock& clock, int politeness_delay_ms = 2000);

  void navigate(const std::string& absolute_url) override;
  void click(const std::string& selector) override;
  void scroll(int amount) override;
  std::string screenshot() override;
  std::string get_html() override;
  std::string current_url() override;
  const std::string& session_id() const override;

  // Simulates losing the browser; every later call is fatal.
  void close();

 private:
  void ensure_alive() const;
  // GET with politeness, cookie jar, and error mapping.
  std::string fetch(const std::string& absolute_url);
  void load_into_dom(const std::string& absolute_url);

  Clock& clock_;
  PolitenessGate gate_;
  std::string id_;
  bool alive_ = true;
  std::string url_;
  html::Document dom_;
  int scroll_y_ = 0;
  std::map<std::string, std::map<std::string, std::string>> cookies_;
};

// W3C WebDriver client: drives a browser the operator launched (e.g.
// geckodriver). Same politeness gate in front of navigations.
class WebDriverBrowser : public Browser {
 public:
  // driver_endpoint like "http://127.0.0.1:4444". Creates a session.
  WebDriverBrowser(const std::string& driver_endpoint, Clock& clock,
                   int politeness_delay_ms = 2000);
  ~WebDriverBrowser() override;

  void navigate(const std::string& absolute_url) override;
  void click(const std::string& selector) override;
  void scroll(int amount) override;
  std::string screenshot() override;
  std::string get_html() override;
  std::string current_url() override;
  const std::string& session_id() const override;

 private:
  std::string command(const std::string& method, const std::string& path,
                      const std::string& body);

  std::string endpoint_;
  Clock& clock_;
  PolitenessGate gate_;
  std::string id_;
};

}  // namespace webscraper::browser
