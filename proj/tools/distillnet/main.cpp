#include <iostream>

#include "distillnet/cli/app.hpp"

int main(int argc, char** argv) { return distillnet::cli::run_app(argc, argv, std::cout, std::cerr); }
