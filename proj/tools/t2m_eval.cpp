#include "t2m/cli.hpp"

int main(int argc, char** argv) { return t2m::cli::run(argc, argv); }
