#include <iostream>

#include "zoomout/cli.hpp"

int main(int argc, char** argv) { return zoomout::dispatch(argc, const_cast<const char* const*>(argv), std::cout, std::cerr); }
