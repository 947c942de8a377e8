#include "cgec/cli.hpp"

int main(int argc, char** argv) { return cgec::cli::run(argc, argv); }
