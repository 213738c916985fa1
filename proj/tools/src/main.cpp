#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) { return pkcli::cli_main(argc, argv, std::cout, std::cerr); }
