int main() {
 bool f = __VERIFIER_nondet_bool();
 int c = __VERIFIER_nondet_int();
 if (f && c < 0 && c * c == 1369) {
  int i = 0;
  int y = c;
  while (i < 13) {
   y = y + c;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 8) {
   reach_error();
  }
 }
 return 0;
}
