// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/cli.hpp>

#include <iostream>

int main(int argc, char** argv) {
    return drts::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
