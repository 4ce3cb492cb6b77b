#include <assert.h>
void reach_error() {
 GOAL_1:;
}

bool check(int a, int b, int c, int x) {
 GOAL_2:;
 return (a*x*x + b*x + c == 0);
}

int main() {
 GOAL_0:;
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 int c = __VERIFIER_nondet_int();
 if(b*b >= 4*a*c) {
  GOAL_4:;
  while(1) {
   GOAL_6:;
   int x = __VERIFIER_nondet_int();
   if(x <= 0 || x > 100) {
    GOAL_8:;
    reach_error();
   }
   else {
    GOAL_9:;
   }
   if(check(a, b, c, x)) {
    GOAL_10:;
    return 0;
   }
   else {
    GOAL_11:;
   }
  }
  GOAL_7:;
 }
 else {
   GOAL_5:;
   reach_error();
 }    
 GOAL_3:;
 return 0;
}
