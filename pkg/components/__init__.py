# Components package for eigencomplete
