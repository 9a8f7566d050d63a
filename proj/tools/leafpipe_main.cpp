#include "leafpipe/cli.hpp"

int main(int argc, char** argv) { return leafpipe::cli::run(argc, argv); }
