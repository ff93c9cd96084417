#ifndef SEMAPHORE_H
#define SEMAPHORE_H

void Wait_Sem(int sem_id, int num_sem);
void Signal_Sem(int sem_id, int num_sem);

#endif
