#include <iostream>

#include "preduce/cli/app.hpp"

int main(int argc, char** argv) { return preduce::cli::run_app(argc, argv, std::cout, std::cerr); }
