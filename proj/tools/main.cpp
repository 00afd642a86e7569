#include "gmentropy/cli.hpp"

int main(int argc, char** argv) { return gmentropy::cli::dispatch(argc, argv); }
