#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "debatelab/http_gateway.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "debatelab/error.hpp"

namespace debatelab {

using nlohmann::json;

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string origin, std::string prefix, double timeout_seconds)
      : origin_(std::move(origin)), prefix_(std::move(prefix)), timeout_(timeout_seconds) {}

  HttpResponse post(const std::string& path, const std::string& body,
                    const HttpHeaders& headers) override {
    httplib::Client client(origin_);
    const auto seconds = static_cast<time_t>(timeout_);
    const auto micros = static_cast<time_t>((timeout_ - std::floor(timeout_)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(prefix_ + path, h, body, "application/json");
    if (!result) throw TransportError("request to " + origin_ + prefix_ + path + " failed: " +
                                      httplib::to_string(result.error()));
    return {result->status, result->body};
  }

 private:
  std::string origin_;
  std::string prefix_;
  double timeout_;
};

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos))
    text.replace(pos, secret.size(), "[REDACTED]");
  return text;
}

std::string url_encode_path_segment(const std::string& s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   double timeout_seconds) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + base_url);
  const auto path_start = base_url.find('/', scheme_end + 3);
  std::string origin = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return std::make_unique<HttplibTransport>(std::move(origin), std::move(prefix), timeout_seconds);
}

std::chrono::duration<double> backoff_delay(double base_seconds, int attempt) {
  return std::chrono::duration<double>(base_seconds * std::ldexp(1.0, attempt));
}

bool is_retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

HttpGateway::HttpGateway(ProviderConfig config, ClassifierPrompts prompts,
                         std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      prompts_(std::move(prompts)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {
  if (auto problems = validate_provider_config(config_); !problems.empty())
    throw ConfigError("provider config: " + problems.front());
  if (!transport_) throw ConfigError("HTTP gateway needs a transport");
  if (!sleeper_) sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  if (!config_.api_key_env.empty())
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

void HttpGateway::log(const std::string& line) const {
  if (!config_.verbose) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[debatelab] " << redact(line, api_key_) << '\n';
}

json HttpGateway::post_json(const std::string& path, const json& body) {
  HttpHeaders headers = {{"Content-Type", "application/json"}};
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    log("POST " + path + " attempt " + std::to_string(attempt + 1) + " body " + payload);
    bool retryable = true;
    try {
      const HttpResponse response = transport_->post(path, payload, headers);
      log("<- " + std::to_string(response.status) + " " + response.body);
      if (response.status >= 200 && response.status < 300) {
        try {
          return json::parse(response.body);
        } catch (const json::exception& e) {
          throw ProtocolError(std::string("response body is not JSON: ") + e.what());
        }
      }
      last_error = "HTTP " + std::to_string(response.status) + " from " + path;
      retryable = is_retryable_status(response.status);
    } catch (const TransportError& e) {
      last_error = e.what();
    }
    if (!retryable || attempt >= config_.max_retries)
      throw TransportError(last_error + " (after " + std::to_string(attempt + 1) + " attempt" +
                           (attempt == 0 ? "" : "s") + ")");
    sleeper_(backoff_delay(config_.backoff_base_seconds, attempt));
  }
}

std::string HttpGateway::chat_complete(const ChatRequest& request) {
  if (auto problems = validate_request(request); !problems.empty())
    throw ConfigError("invalid chat request: " + problems.front());
  return extract_chat_text(post_json("/v1/chat/completions", chat_request_body(request)));
}

std::vector<EmbeddingVector> HttpGateway::embed(const std::string& model,
                                                std::span<const std::string> texts) {
  if (texts.empty()) throw ConfigError("embed needs at least one text");
  for (const std::string& t : texts)
    if (t.empty()) throw ConfigError("cannot embed an empty text");
  json body = {{"model", model}, {"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
  return parse_embedding_response(post_json("/v1/embeddings", body), texts.size());
}

SentimentScore HttpGateway::classify_sentiment(const std::string& model, const std::string& text) {
  if (text.empty()) throw ConfigError("cannot classify an empty text");
  if (config_.sentiment_mode == SentimentMode::chat)
    return classify_sentiment_via_chat([this](const ChatRequest& r) { return chat_complete(r); },
                                       model, text, prompts_);
  const json reply = post_json("/models/" + url_encode_path_segment(model), {{"inputs", text}});
  return normalize_sentiment(parse_sentiment_classification(reply));
}

int HttpGateway::classify_bias(const std::string& model, const std::string& text) {
  if (text.empty()) throw ConfigError("cannot classify an empty text");
  return classify_bias_via_chat([this](const ChatRequest& r) { return chat_complete(r); }, model,
                                text, prompts_);
}

}  // namespace debatelab
