#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "debatelab/gateway.hpp"

namespace debatelab {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Minimal POST transport. Connection failures and timeouts are reported by
/// throwing TransportError; any HTTP status is returned as-is.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const HttpHeaders& headers) = 0;
};

/// cpp-httplib transport for `base_url` (http:// or https://, optional path
/// prefix). A fresh connection is opened per request, so one instance can be
/// shared by concurrent workers.
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   double timeout_seconds);

using Sleeper = std::function<void(std::chrono::duration<double>)>;

/// Delay before retry number `attempt` (0-based): base * 2^attempt.
std::chrono::duration<double> backoff_delay(double base_seconds, int attempt);

/// True for statuses worth retrying: 408, 429 and 5xx.
bool is_retryable_status(int status);

/// Client for OpenAI-compatible endpoints:
///   POST /v1/chat/completions   {model, messages, temperature, max_tokens}
///   POST /v1/embeddings         {model, input: [...]}
///   POST /models/<model>        {inputs: text}   (sentiment classification mode)
/// Bias labels and chat-mode sentiment go through chat completions.
class HttpGateway final : public ModelGateway {
 public:
  HttpGateway(ProviderConfig config, ClassifierPrompts prompts,
              std::shared_ptr<HttpTransport> transport, Sleeper sleeper = {});

  std::string chat_complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::string& model,
                                     std::span<const std::string> texts) override;
  SentimentScore classify_sentiment(const std::string& model, const std::string& text) override;
  int classify_bias(const std::string& model, const std::string& text) override;

 private:
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body);
  void log(const std::string& line) const;

  ProviderConfig config_;
  ClassifierPrompts prompts_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  std::string api_key_;
};

}  // namespace debatelab
