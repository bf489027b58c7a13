#include "seba/cli.hpp"

int main(int argc, char** argv) { return seba::cli::dispatch(argc, argv); }
