#include <assert.h>
void reach_error() { }

bool check(int a, int b, int c, int x) {
 return (a*x*x + b*x + c == 0);
}

int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 int c = __VERIFIER_nondet_int();
 if(b*b >= 4*a*c) {
  while(1) {
   int x = __VERIFIER_nondet_int();
   if(x <= 0 || x > 100) 
    reach_error();
   if(check(a, b, c, x)) 
    return 0;
  }
 }
 else
  reach_error();
 
return 0;
}
