int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 if (a * a - b == 17 && b * 3 == a + 4709) {
  int i = 0;
  int y = b;
  while (i < 14) {
   y = y + 3;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 2) {
   reach_error();
  }
 }
 return 0;
}
