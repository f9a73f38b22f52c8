#include "geoatt/cli.hpp"

int main(int argc, char** argv) { return geoatt::cli::run(argc, argv); }
