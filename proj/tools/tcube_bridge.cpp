// tcube-bridge: serve live sessions over WebSocket.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "tcube/bridge_server.hpp"
#include "tcube/config.hpp"
#include "tcube/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve one engine session per WebSocket connection"};
  std::string bind = "127.0.0.1:8765";
  std::string data_dir = TCUBE_DATA_DIR;
  std::string record_dir = ".";
  std::string params;
  app.add_option("--bind", bind, "host:port to listen on")->envname("TCUBE_BRIDGE_BIND");
  app.add_option("--data-dir", data_dir, "Directory holding datasets/ and rulebooks/")->envname("TCUBE_DATA_DIR");
  app.add_option("--record-dir", record_dir, "Where recordings are written")->envname("TCUBE_RECORD_DIR");
  app.add_option("--params", params, "Config file with parameter overrides");
  CLI11_PARSE(app, argc, argv);

  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "tcube-bridge: --bind expects host:port\n";
    return 2;
  }
  tcube::BridgeOptions opt;
  opt.catalog.datasets_dir = (std::filesystem::path(data_dir) / "datasets").string();
  opt.catalog.rulebooks_dir = (std::filesystem::path(data_dir) / "rulebooks").string();
  opt.record_dir = record_dir;
  try {
    if (!params.empty()) opt.config = tcube::load_config_file(params);
    const int port = std::stoi(bind.substr(colon + 1));
    tcube::BridgeServer server(opt, bind.substr(0, colon), static_cast<unsigned short>(port));
    server.stop_on_signals();
    std::cerr << "tcube-bridge: listening on " << bind.substr(0, colon) << ":" << server.port() << "\n";
    server.run();
  } catch (const tcube::Error& e) {
    std::cerr << "tcube-bridge: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tcube-bridge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
