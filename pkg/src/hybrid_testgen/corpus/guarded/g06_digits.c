int main() {
 int x = __VERIFIER_nondet_int();
 if (x % 1000 == 777 && x / 1000 == 4242) {
  int i = 0;
  int y = 0;
  while (i < 11) {
   y = y + x % 7;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 6) {
   reach_error();
  }
 }
 return 0;
}
