// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cblue/cli.hpp"

int main(int argc, char** argv)
{
    return cblue::cli::run(argc, argv, std::cout, std::cerr);
}
