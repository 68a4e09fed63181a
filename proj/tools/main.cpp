#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) { return beta_targets::cli::run(argc, argv, std::cout, std::cerr); }
