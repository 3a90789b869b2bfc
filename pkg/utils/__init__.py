# Utils package for eigencomplete
