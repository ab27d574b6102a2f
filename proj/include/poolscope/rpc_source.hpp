#pragma once

#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "poolscope/ingest.hpp"

namespace poolscope {

/// RemoteEventSource over JSON-RPC (eth_getLogs / eth_getTransactionByHash).
/// Connection-level problems surface as TransportError so the fetch pipeline
/// retries them; node-side RPC error objects do not (retrying a rejected
/// query will not help).
class JsonRpcEventSource final : public RemoteEventSource {
 public:
  explicit JsonRpcEventSource(const std::string& url) : client_(base_of(url)), path_(path_of(url)) {
    client_.set_connection_timeout(10);
    client_.set_read_timeout(30);
  }

  nlohmann::json get_logs(const LogQuery& query) override {
    nlohmann::json filter;
    filter["address"] = query.address;
    filter["topics"] = {query.topic0};
    filter["fromBlock"] = hex_quantity(query.from_block);
    filter["toBlock"] = hex_quantity(query.to_block);
    return call("eth_getLogs", nlohmann::json::array({filter}));
  }

  nlohmann::json get_transaction_by_hash(const std::string& tx_hash) override {
    return call("eth_getTransactionByHash", nlohmann::json::array({tx_hash}));
  }

 private:
  static std::string hex_quantity(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(v));
    return buf;
  }

  // httplib wants scheme://host:port without a path; keep any path for POSTs.
  static std::string base_of(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) return url;
    const auto slash = url.find('/', scheme + 3);
    return slash == std::string::npos ? url : url.substr(0, slash);
  }

  static std::string path_of(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) return "/";
    const auto slash = url.find('/', scheme + 3);
    return slash == std::string::npos ? "/" : url.substr(slash);
  }

  nlohmann::json call(const std::string& method, nlohmann::json params) {
    nlohmann::json request;
    request["jsonrpc"] = "2.0";
    request["id"] = next_id_++;
    request["method"] = method;
    request["params"] = std::move(params);
    auto res = client_.Post(path_, request.dump(), "application/json");
    if (!res) throw TransportError(method + ": no response from node");
    if (res->status != 200) throw TransportError(method + ": HTTP " + std::to_string(res->status));
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const std::exception& ex) {
      throw TransportError(method + ": unparseable response: " + ex.what());
    }
    if (body.contains("error") && !body["error"].is_null())
      throw RuntimeError(method + " rejected: " + body["error"].dump());
    if (!body.contains("result")) throw TransportError(method + ": response carries no result");
    return body["result"];
  }

  httplib::Client client_;
  std::string path_;
  int next_id_ = 1;
};

}  // namespace poolscope
