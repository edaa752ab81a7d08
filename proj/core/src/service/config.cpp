#include <cstdlib>

#include "netzero/error.hpp"
#include "netzero/json_io.hpp"
#include "netzero/service.hpp"
#include "netzero/text.hpp"

namespace netzero {

std::pair<std::string, int> parse_listen(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) fail(ErrorKind::invalid_argument, "listen address must be host:port");
  std::string host(text.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  const auto port = text::parse_int(text.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) {
    fail(ErrorKind::invalid_argument, "invalid port in listen address '" + std::string(text) + "'");
  }
  return {host, static_cast<int>(*port)};
}

ServiceConfig service_config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::schema, "service config must be a JSON object");
  ServiceConfig c;
  try {
    if (j.contains("listen")) std::tie(c.listen_host, c.listen_port) = parse_listen(j.at("listen").get<std::string>());
    if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("ui_dir") && !j.at("ui_dir").is_null()) c.ui_dir = j.at("ui_dir").get<std::string>();
    if (j.contains("selection_threads")) c.selection_threads = j.at("selection_threads").get<unsigned>();
    if (j.contains("facilities")) {
      for (const auto& f : j.at("facilities")) c.facilities.push_back(facility_config_from_json(f));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("service config: ") + e.what());
  }
  return c;
}

void apply_env_overrides(ServiceConfig& config) {
  if (const char* listen = std::getenv("NETZERO_LISTEN"); listen && *listen) {
    std::tie(config.listen_host, config.listen_port) = parse_listen(listen);
  }
  if (const char* dir = std::getenv("NETZERO_DATA_DIR"); dir && *dir) config.data_dir = dir;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::not_found, "config file " + path.string() + " does not exist");
  ServiceConfig c = service_config_from_json(parse_json(read_file(path)));
  if (c.data_dir.is_relative()) c.data_dir = path.parent_path() / c.data_dir;
  if (c.ui_dir && c.ui_dir->is_relative()) c.ui_dir = path.parent_path() / *c.ui_dir;
  apply_env_overrides(c);
  return c;
}

}  // namespace netzero
