#include "layerlab/cli.hpp"

int main(int argc, char** argv) { return layerlab::cli::main(argc, argv); }
