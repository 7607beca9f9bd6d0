#include "app.h"

int main(int argc, char** argv) { return lanepareto::cli::Main(argc, argv); }
