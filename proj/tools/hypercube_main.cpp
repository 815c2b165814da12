#include <iostream>
#include <string>
#include <vector>

#include "hypercube/cli.hpp"
#include "hypercube/http_backend.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    hypercube::HttpFactory http_factory = [](const hypercube::AppConfig& config) {
        return std::make_shared<hypercube::HttpChatBackend>(config.http,
                                                            config.llm.max_in_flight);
    };
    return hypercube::run_cli(std::move(args), std::cout, std::cerr, http_factory);
}
