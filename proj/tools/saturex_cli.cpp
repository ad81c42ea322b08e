#include "saturex/cli.hpp"

int main(int argc, char** argv) { return saturex::run_cli(argc, argv); }
