#include "sse/providers.hpp"

#include <chrono>
#include <cmath>
#include <future>

#include <httplib.h>

#include "sse/error.hpp"

namespace sse {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + "/embed"
};

Endpoint parse_base_url(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos || base.substr(0, scheme_end) != "http") {
    throw Error(ErrorCode::invalid_argument, "base_url must start with http://: " + base);
  }
  const auto slash = base.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + "/embed";
  return ep;
}

std::vector<std::vector<float>> post_batch(const HttpBackend& cfg, const Endpoint& ep,
                                           std::span<const std::string> texts) {
  Json body;
  body["model"] = cfg.model;
  body["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  const std::string payload = body.dump();

  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(cfg.timeout_s));
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= cfg.retries; ++attempt) {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(ep.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      if (res->status >= 500) continue;
      break;
    }
    Json reply;
    try {
      reply = Json::parse(res->body);
      auto rows = reply.at("embeddings").get<std::vector<std::vector<float>>>();
      if (rows.size() != texts.size()) {
        throw Error(ErrorCode::transport, "embedding service returned " +
                                              std::to_string(rows.size()) + " rows for " +
                                              std::to_string(texts.size()) + " texts");
      }
      return rows;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::transport, std::string("malformed embedding response: ") + e.what());
    }
  }
  throw Error(ErrorCode::transport, "POST " + ep.origin + ep.path + " failed after " +
                                        std::to_string(cfg.retries + 1) +
                                        " attempt(s): " + last_error);
}

EmbeddingMatrix embed_http(const HttpBackend& cfg, std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::precondition, "no texts to embed");
  const Endpoint ep = parse_base_url(cfg.base_url);

  std::vector<std::span<const std::string>> batches;
  for (std::size_t i = 0; i < texts.size(); i += cfg.max_batch) {
    batches.push_back(texts.subspan(i, std::min(cfg.max_batch, texts.size() - i)));
  }
  std::vector<std::vector<std::vector<float>>> results(batches.size());
  for (std::size_t wave = 0; wave < batches.size(); wave += cfg.max_in_flight) {
    std::vector<std::future<std::vector<std::vector<float>>>> inflight;
    const std::size_t end = std::min(batches.size(), wave + cfg.max_in_flight);
    for (std::size_t b = wave; b < end; ++b) {
      inflight.push_back(std::async(std::launch::async, post_batch, std::cref(cfg),
                                    std::cref(ep), batches[b]));
    }
    for (std::size_t b = wave; b < end; ++b) results[b] = inflight[b - wave].get();
  }

  const std::size_t dim = results.front().front().size();
  std::vector<float> data;
  data.reserve(texts.size() * dim);
  for (const auto& batch : results) {
    for (const auto& row : batch) {
      if (row.size() != dim || dim == 0) {
        throw Error(ErrorCode::transport, "embedding service returned rows of mixed dimension");
      }
      data.insert(data.end(), row.begin(), row.end());
    }
  }
  EmbeddingMatrix raw(texts.size(), dim, std::move(data), false);
  validate_rows(raw);
  return normalize(raw);
}

}  // namespace

void ProviderConfig::validate() const {
  if (const auto* h = std::get_if<HttpBackend>(&backend)) {
    if (!(h->timeout_s > 0.0)) throw Error(ErrorCode::invalid_argument, "timeout must be > 0");
    if (h->max_batch == 0) throw Error(ErrorCode::invalid_argument, "max_batch must be > 0");
    if (h->max_in_flight == 0) throw Error(ErrorCode::invalid_argument, "max_in_flight must be > 0");
    if (h->model.empty()) throw Error(ErrorCode::invalid_argument, "model name is required");
    parse_base_url(h->base_url);
  } else {
    if (std::get<FileBackend>(backend).path.empty()) {
      throw Error(ErrorCode::invalid_argument, "file provider needs a path");
    }
  }
}

ProviderConfig ProviderConfig::from_json(const Json& j) {
  ProviderConfig cfg;
  try {
    const std::string kind = j.at("kind");
    if (kind == "file") {
      FileBackend f;
      f.path = j.at("path").get<std::string>();
      if (j.contains("query_path")) f.query_path = j["query_path"].get<std::string>();
      cfg.backend = f;
    } else if (kind == "http") {
      HttpBackend h;
      h.base_url = j.at("base_url");
      h.model = j.at("model");
      h.timeout_s = j.value("timeout_s", h.timeout_s);
      h.max_batch = j.value("max_batch", h.max_batch);
      h.retries = j.value("retries", h.retries);
      h.max_in_flight = j.value("max_in_flight", h.max_in_flight);
      cfg.backend = h;
    } else {
      throw Error(ErrorCode::invalid_argument, "provider kind must be 'file' or 'http'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad provider config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ProviderConfig ProviderConfig::load(const std::filesystem::path& path) {
  ProviderConfig cfg = from_json(read_json_file(path));
  // Relative file paths resolve against the config's directory.
  if (auto* f = std::get_if<FileBackend>(&cfg.backend)) {
    const auto base = path.parent_path();
    if (f->path.is_relative()) f->path = base / f->path;
    if (f->query_path && f->query_path->is_relative()) f->query_path = base / *f->query_path;
  }
  return cfg;
}

EmbeddingMatrix embed_texts(const ProviderConfig& cfg, std::span<const std::string> texts) {
  cfg.validate();
  if (const auto* h = std::get_if<HttpBackend>(&cfg.backend)) return embed_http(*h, texts);
  const auto& f = std::get<FileBackend>(cfg.backend);
  EmbeddingMatrix m = read_embeddings(f.path);
  if (m.count() != texts.size()) {
    throw Error(ErrorCode::precondition, f.path.string() + " has " + std::to_string(m.count()) +
                                             " rows but " + std::to_string(texts.size()) +
                                             " texts were given");
  }
  return normalize(m);
}

std::vector<float> embed_query(const ProviderConfig& cfg, const std::string& query) {
  cfg.validate();
  if (query.empty()) throw Error(ErrorCode::precondition, "query must be non-empty");
  if (std::holds_alternative<HttpBackend>(cfg.backend)) {
    const std::string texts[] = {query};
    const EmbeddingMatrix m = embed_texts(cfg, texts);
    auto row = m.row(0);
    return {row.begin(), row.end()};
  }
  const auto& f = std::get<FileBackend>(cfg.backend);
  if (!f.query_path) {
    throw Error(ErrorCode::precondition,
                "file provider has no query sidecar; queries cannot be embedded");
  }
  const Json sidecar = read_json_file(*f.query_path);
  auto it = sidecar.find(query);
  if (it == sidecar.end()) {
    throw Error(ErrorCode::precondition, "query not found in sidecar " + f.query_path->string());
  }
  std::vector<float> v;
  try {
    v = it->get<std::vector<float>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, std::string("bad sidecar vector: ") + e.what());
  }
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::format, "sidecar vector has a non-finite value");
  }
  return normalize(v);
}

}  // namespace sse
